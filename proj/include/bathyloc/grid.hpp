#ifndef BATHYLOC_GRID_HPP
#define BATHYLOC_GRID_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace bathyloc {

/// Feet-to-meters conversion applied when an ESRI grid declares `units feet`.
inline constexpr double kFeetToMeters = 0.3048;

/// Recipe for a procedurally generated lake raster. Stands in for surveyed
/// bathymetry when no real grid is at hand.
struct SyntheticLakeSpec {
  enum class Profile { bowl, tilted_plane, ridge, twin_basin };

  int ncols = 200;
  int nrows = 200;
  double cell_size = 1.0;     // meters
  Profile profile = Profile::bowl;
  double max_height = 20.0;   // meters, peak water-column height
  double asymmetry = 0.0;     // in [0,1], skews the profile
  double noise_amplitude = 0.0; // meters of smooth terrain noise
  std::uint64_t seed = 0;

  /// Throws ValueError if any field is out of range.
  void validate() const;
};

const char* profile_name(SyntheticLakeSpec::Profile p);
SyntheticLakeSpec::Profile profile_from_name(const std::string& name);

/// Immutable raster of water-column heights L(x,y) in meters.
///
/// Storage is row-major with row 0 at the *south* edge: world y increases
/// with the row index. Cell (r, c) is centered at
/// (origin_x + (c+0.5)*cell_size, origin_y + (r+0.5)*cell_size).
/// Continuous queries interpolate bilinearly between the four surrounding
/// cell centers; the interpolable interior is the convex hull of cell
/// centers. Cells holding the nodata sentinel are land: any query whose
/// interpolation stencil touches one is out of bounds.
///
/// Instances never change after construction and are safe to share across
/// threads.
class BathymetryGrid {
public:
  static constexpr double kDefaultNodata = -9999.0;

  BathymetryGrid(int ncols, int nrows, double cell_size, double origin_x, double origin_y,
                 std::vector<double> heights, double nodata = kDefaultNodata);

  int ncols() const { return ncols_; }
  int nrows() const { return nrows_; }
  double cell_size() const { return cell_size_; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  double nodata() const { return nodata_; }
  const std::vector<double>& heights() const { return heights_; }

  double cell(int row, int col) const { return heights_[static_cast<std::size_t>(row) * ncols_ + col]; }
  bool is_nodata(int row, int col) const { return cell(row, col) == nodata_; }

  double cell_center_x(int col) const { return origin_x_ + (col + 0.5) * cell_size_; }
  double cell_center_y(int row) const { return origin_y_ + (row + 0.5) * cell_size_; }

  /// World-coordinate extent of the interpolable interior (hull of centers).
  double min_x() const { return cell_center_x(0); }
  double max_x() const { return cell_center_x(ncols_ - 1); }
  double min_y() const { return cell_center_y(0); }
  double max_y() const { return cell_center_y(nrows_ - 1); }

  /// True iff (x, y) lies within the hull of cell centers and the four
  /// surrounding cells are all water.
  bool in_bounds(double x, double y) const;

  /// Bilinear water-column height at a continuous position, exact at cell
  /// centers. Throws BoundsError / NodataError.
  double height_at(double x, double y) const;

  /// (dL/dx, dL/dy) by central differences of height_at with step cell_size,
  /// falling back to one-sided differences within one cell of the boundary.
  std::pair<double, double> gradient_at(double x, double y) const;

  /// Extremes over water cells. Returns (0, 0) for an all-land grid.
  double min_height() const;
  double max_height() const;

private:
  int ncols_;
  int nrows_;
  double cell_size_;
  double origin_x_;
  double origin_y_;
  double nodata_;
  std::vector<double> heights_;
};

/// Parses an ESRI ASCII grid. Header keys are case-insensitive
/// (ncols, nrows, xllcorner, yllcorner, cellsize, nodata_value, units);
/// data rows run top-first. Heights given in feet (`units feet`) are
/// converted to meters.
BathymetryGrid load_esri_ascii(std::istream& in);
BathymetryGrid load_esri_ascii(const std::string& text);
BathymetryGrid load_esri_ascii_file(const std::string& path);

/// Writes the grid as ESRI ASCII with 6 significant digits, meters.
void write_esri_ascii(const BathymetryGrid& grid, std::ostream& out);
std::string to_esri_ascii(const BathymetryGrid& grid);
void save_esri_ascii_file(const BathymetryGrid& grid, const std::string& path);

/// Deterministic in spec.seed: equal specs produce bit-identical grids.
BathymetryGrid generate_synthetic_lake(const SyntheticLakeSpec& spec);

} // namespace bathyloc

#endif
