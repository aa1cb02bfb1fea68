#include "bathyloc/grid.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "bathyloc/errors.hpp"
#include "bathyloc/rng.hpp"

namespace bathyloc {

void SyntheticLakeSpec::validate() const {
  if (ncols < 1 || nrows < 1) {
    throw ValueError("synthetic lake: ncols and nrows must be positive");
  }
  if (!(cell_size > 0.0)) {
    throw ValueError("synthetic lake: cell_size must be > 0");
  }
  if (!(max_height > 0.0)) {
    throw ValueError("synthetic lake: max_height must be > 0");
  }
  if (asymmetry < 0.0 || asymmetry > 1.0) {
    throw ValueError("synthetic lake: asymmetry must be in [0,1]");
  }
  if (noise_amplitude < 0.0) {
    throw ValueError("synthetic lake: noise_amplitude must be >= 0");
  }
}

const char* profile_name(SyntheticLakeSpec::Profile p) {
  switch (p) {
    case SyntheticLakeSpec::Profile::bowl: return "bowl";
    case SyntheticLakeSpec::Profile::tilted_plane: return "tilted-plane";
    case SyntheticLakeSpec::Profile::ridge: return "ridge";
    case SyntheticLakeSpec::Profile::twin_basin: return "twin-basin";
  }
  return "bowl";
}

SyntheticLakeSpec::Profile profile_from_name(const std::string& name) {
  if (name == "bowl") return SyntheticLakeSpec::Profile::bowl;
  if (name == "tilted-plane" || name == "tilted_plane") return SyntheticLakeSpec::Profile::tilted_plane;
  if (name == "ridge") return SyntheticLakeSpec::Profile::ridge;
  if (name == "twin-basin" || name == "twin_basin") return SyntheticLakeSpec::Profile::twin_basin;
  throw ValueError("unknown lake profile: " + name);
}

BathymetryGrid::BathymetryGrid(int ncols, int nrows, double cell_size, double origin_x,
                               double origin_y, std::vector<double> heights, double nodata)
    : ncols_(ncols),
      nrows_(nrows),
      cell_size_(cell_size),
      origin_x_(origin_x),
      origin_y_(origin_y),
      nodata_(nodata),
      heights_(std::move(heights)) {
  if (ncols_ < 1 || nrows_ < 1) {
    throw ValueError("grid dimensions must be positive");
  }
  if (!(cell_size_ > 0.0)) {
    throw ValueError("grid cell_size must be > 0");
  }
  if (heights_.size() != static_cast<std::size_t>(ncols_) * static_cast<std::size_t>(nrows_)) {
    throw DimensionError("heights array length does not equal nrows * ncols");
  }
  for (double h : heights_) {
    if (h != nodata_ && (!std::isfinite(h) || h < 0.0)) {
      throw ValueError("grid heights must be finite and >= 0 (or the nodata sentinel)");
    }
  }
}

namespace {

struct StencilCell {
  int c0, r0, c1, r1;
  double fx, fy;
};

// Locates the four cell centers surrounding (x, y). Returns nullopt when the
// point is outside the hull of cell centers.
std::optional<StencilCell> locate(const BathymetryGrid& g, double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
  const double u = (x - g.origin_x()) / g.cell_size() - 0.5;
  const double v = (y - g.origin_y()) / g.cell_size() - 0.5;
  if (u < 0.0 || u > g.ncols() - 1 || v < 0.0 || v > g.nrows() - 1) return std::nullopt;
  StencilCell s;
  s.c0 = std::min(static_cast<int>(u), std::max(g.ncols() - 2, 0));
  s.r0 = std::min(static_cast<int>(v), std::max(g.nrows() - 2, 0));
  s.c1 = std::min(s.c0 + 1, g.ncols() - 1);
  s.r1 = std::min(s.r0 + 1, g.nrows() - 1);
  s.fx = u - s.c0;
  s.fy = v - s.r0;
  return s;
}

bool stencil_has_nodata(const BathymetryGrid& g, const StencilCell& s) {
  return g.is_nodata(s.r0, s.c0) || g.is_nodata(s.r0, s.c1) || g.is_nodata(s.r1, s.c0) ||
         g.is_nodata(s.r1, s.c1);
}

} // namespace

bool BathymetryGrid::in_bounds(double x, double y) const {
  const auto s = locate(*this, x, y);
  return s && !stencil_has_nodata(*this, *s);
}

double BathymetryGrid::height_at(double x, double y) const {
  const auto s = locate(*this, x, y);
  if (!s) {
    throw BoundsError("height query outside grid interior");
  }
  if (stencil_has_nodata(*this, *s)) {
    throw NodataError("height query touches a nodata (land) cell");
  }
  const double h00 = cell(s->r0, s->c0);
  const double h01 = cell(s->r0, s->c1);
  const double h10 = cell(s->r1, s->c0);
  const double h11 = cell(s->r1, s->c1);
  const double bottom = h00 + (h01 - h00) * s->fx;
  const double top = h10 + (h11 - h10) * s->fx;
  return bottom + (top - bottom) * s->fy;
}

std::pair<double, double> BathymetryGrid::gradient_at(double x, double y) const {
  const double hc = height_at(x, y); // validates the center point
  const double h = cell_size_;

  auto partial = [&](bool along_x) {
    const double xp = along_x ? x + h : x;
    const double xm = along_x ? x - h : x;
    const double yp = along_x ? y : y + h;
    const double ym = along_x ? y : y - h;
    const bool plus_ok = in_bounds(xp, yp);
    const bool minus_ok = in_bounds(xm, ym);
    if (plus_ok && minus_ok) {
      return (height_at(xp, yp) - height_at(xm, ym)) / (2.0 * h);
    }
    if (plus_ok) {
      return (height_at(xp, yp) - hc) / h;
    }
    if (minus_ok) {
      return (hc - height_at(xm, ym)) / h;
    }
    throw BoundsError("gradient query has no usable finite-difference stencil");
  };

  return {partial(true), partial(false)};
}

double BathymetryGrid::min_height() const {
  double m = std::numeric_limits<double>::infinity();
  for (double h : heights_) {
    if (h != nodata_) m = std::min(m, h);
  }
  return std::isfinite(m) ? m : 0.0;
}

double BathymetryGrid::max_height() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double h : heights_) {
    if (h != nodata_) m = std::max(m, h);
  }
  return std::isfinite(m) ? m : 0.0;
}

// ---------------------------------------------------------------------------
// ESRI ASCII I/O

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool parse_number(const std::string& tok, double& out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

} // namespace

BathymetryGrid load_esri_ascii(std::istream& in) {
  double ncols = 0, nrows = 0, xll = 0, yll = 0, cellsize = 0;
  double nodata = BathymetryGrid::kDefaultNodata;
  bool have_ncols = false, have_nrows = false, have_xll = false, have_yll = false,
       have_cell = false, feet = false;

  // Header: lines of "key value" until the first line starting with a number.
  std::string line;
  std::streampos data_start = in.tellg();
  while (true) {
    data_start = in.tellg();
    if (!std::getline(in, line)) {
      throw ParseError("esri ascii: missing data rows");
    }
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue; // blank line
    if (!std::isalpha(static_cast<unsigned char>(key[0]))) break; // data begins

    const std::string k = lower(key);
    std::string value;
    if (!(ls >> value)) {
      throw ParseError("esri ascii: header key '" + key + "' has no value");
    }
    if (k == "units") {
      const std::string v = lower(value);
      if (v == "feet") {
        feet = true;
      } else if (v != "meters") {
        throw ParseError("esri ascii: header key 'units' must be feet or meters");
      }
      continue;
    }
    double num = 0;
    if (!parse_number(value, num)) {
      throw ParseError("esri ascii: header key '" + key + "' has a non-numeric value");
    }
    if (k == "ncols") {
      ncols = num;
      have_ncols = true;
    } else if (k == "nrows") {
      nrows = num;
      have_nrows = true;
    } else if (k == "xllcorner") {
      xll = num;
      have_xll = true;
    } else if (k == "yllcorner") {
      yll = num;
      have_yll = true;
    } else if (k == "cellsize") {
      cellsize = num;
      have_cell = true;
    } else if (k == "nodata_value") {
      nodata = num;
    } else {
      throw ParseError("esri ascii: unknown header key '" + key + "'");
    }
  }

  if (!have_ncols) throw ParseError("esri ascii: missing header key 'ncols'");
  if (!have_nrows) throw ParseError("esri ascii: missing header key 'nrows'");
  if (!have_xll) throw ParseError("esri ascii: missing header key 'xllcorner'");
  if (!have_yll) throw ParseError("esri ascii: missing header key 'yllcorner'");
  if (!have_cell) throw ParseError("esri ascii: missing header key 'cellsize'");

  if (ncols < 1 || ncols != std::floor(ncols)) {
    throw ParseError("esri ascii: header key 'ncols' must be a positive integer");
  }
  if (nrows < 1 || nrows != std::floor(nrows)) {
    throw ParseError("esri ascii: header key 'nrows' must be a positive integer");
  }
  if (!(cellsize > 0.0)) {
    throw ParseError("esri ascii: header key 'cellsize' must be > 0");
  }

  const int nc = static_cast<int>(ncols);
  const int nr = static_cast<int>(nrows);

  // We already consumed the first data line while probing; rewind to it.
  in.clear();
  in.seekg(data_start);

  std::vector<double> heights(static_cast<std::size_t>(nc) * nr, nodata);
  int rows_read = 0;
  while (rows_read < nr) {
    if (!std::getline(in, line)) {
      throw DimensionError("esri ascii: expected " + std::to_string(nr) + " data rows, got " +
                           std::to_string(rows_read));
    }
    std::istringstream ls(line);
    std::string tok;
    int cols_read = 0;
    // File rows run top-first; storage rows run bottom-first.
    const int storage_row = nr - 1 - rows_read;
    while (ls >> tok) {
      double v = 0;
      if (!parse_number(tok, v)) {
        throw ParseError("esri ascii: non-numeric cell value '" + tok + "'");
      }
      if (cols_read >= nc) {
        throw DimensionError("esri ascii: data row " + std::to_string(rows_read + 1) + " has more than " +
                             std::to_string(nc) + " values");
      }
      if (v != nodata) {
        if (feet) v *= kFeetToMeters;
        if (v < 0.0) {
          throw ValueError("esri ascii: negative height after unit conversion");
        }
      }
      heights[static_cast<std::size_t>(storage_row) * nc + cols_read] = v;
      ++cols_read;
    }
    if (cols_read == 0) continue; // tolerate blank lines between rows
    if (cols_read != nc) {
      throw DimensionError("esri ascii: data row " + std::to_string(rows_read + 1) + " has " +
                           std::to_string(cols_read) + " values, expected " + std::to_string(nc));
    }
    ++rows_read;
  }
  // Anything but whitespace after the last row is a cell-count mismatch.
  std::string tail;
  while (std::getline(in, tail)) {
    std::istringstream ls(tail);
    std::string tok;
    if (ls >> tok) {
      throw DimensionError("esri ascii: trailing data after the final row");
    }
  }

  return BathymetryGrid(nc, nr, cellsize, xll, yll, std::move(heights), nodata);
}

BathymetryGrid load_esri_ascii(const std::string& text) {
  std::istringstream in(text);
  return load_esri_ascii(in);
}

BathymetryGrid load_esri_ascii_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open grid file: " + path);
  }
  return load_esri_ascii(in);
}

namespace {

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

} // namespace

void write_esri_ascii(const BathymetryGrid& grid, std::ostream& out) {
  out << "ncols " << grid.ncols() << "\n";
  out << "nrows " << grid.nrows() << "\n";
  out << "xllcorner " << format_g6(grid.origin_x()) << "\n";
  out << "yllcorner " << format_g6(grid.origin_y()) << "\n";
  out << "cellsize " << format_g6(grid.cell_size()) << "\n";
  out << "nodata_value " << format_g6(grid.nodata()) << "\n";
  for (int r = grid.nrows() - 1; r >= 0; --r) {
    for (int c = 0; c < grid.ncols(); ++c) {
      if (c) out << ' ';
      out << format_g6(grid.cell(r, c));
    }
    out << "\n";
  }
}

std::string to_esri_ascii(const BathymetryGrid& grid) {
  std::ostringstream out;
  write_esri_ascii(grid, out);
  return out.str();
}

void save_esri_ascii_file(const BathymetryGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open output file: " + path);
  }
  write_esri_ascii(grid, out);
  if (!out.good()) {
    throw IoError("write failed: " + path);
  }
}

// ---------------------------------------------------------------------------
// Synthetic lakes

namespace {

// Smooth unit-amplitude noise field: seeded white noise run through a few
// separable box-blur passes, then rescaled to max |value| = 1.
std::vector<double> smooth_noise(int ncols, int nrows, std::uint64_t seed) {
  std::vector<double> field(static_cast<std::size_t>(ncols) * nrows);
  Rng rng(derive_seed(seed, 0x6c616b65)); // "lake" stream
  for (double& v : field) v = rng.gaussian();

  std::vector<double> tmp(field.size());
  const int radius = 2;
  for (int pass = 0; pass < 3; ++pass) {
    // horizontal
    for (int r = 0; r < nrows; ++r) {
      for (int c = 0; c < ncols; ++c) {
        double sum = 0;
        int n = 0;
        for (int k = -radius; k <= radius; ++k) {
          const int cc = c + k;
          if (cc < 0 || cc >= ncols) continue;
          sum += field[static_cast<std::size_t>(r) * ncols + cc];
          ++n;
        }
        tmp[static_cast<std::size_t>(r) * ncols + c] = sum / n;
      }
    }
    // vertical
    for (int r = 0; r < nrows; ++r) {
      for (int c = 0; c < ncols; ++c) {
        double sum = 0;
        int n = 0;
        for (int k = -radius; k <= radius; ++k) {
          const int rr = r + k;
          if (rr < 0 || rr >= nrows) continue;
          sum += tmp[static_cast<std::size_t>(rr) * ncols + c];
          ++n;
        }
        field[static_cast<std::size_t>(r) * ncols + c] = sum / n;
      }
    }
  }
  double maxabs = 0;
  for (double v : field) maxabs = std::max(maxabs, std::abs(v));
  if (maxabs > 0) {
    for (double& v : field) v /= maxabs;
  }
  return field;
}

double bowl_value(double u, double v, double asym) {
  const double dx = 2.0 * (u - 0.5) * (1.0 + asym);
  const double dy = 2.0 * (v - 0.5);
  const double r2 = dx * dx + dy * dy;
  return std::max(0.0, 1.0 - r2);
}

double basin(double u, double v, double cu, double cv, double su, double sv) {
  const double dx = (u - cu) / su;
  const double dy = (v - cv) / sv;
  return std::max(0.0, 1.0 - dx * dx - dy * dy);
}

} // namespace

BathymetryGrid generate_synthetic_lake(const SyntheticLakeSpec& spec) {
  spec.validate();
  const int nc = spec.ncols;
  const int nr = spec.nrows;
  std::vector<double> heights(static_cast<std::size_t>(nc) * nr, 0.0);

  const bool zero_ring = spec.profile != SyntheticLakeSpec::Profile::tilted_plane;

  for (int r = 0; r < nr; ++r) {
    for (int c = 0; c < nc; ++c) {
      const double u = (c + 0.5) / nc;
      const double v = (r + 0.5) / nr;
      double h = 0;
      switch (spec.profile) {
        case SyntheticLakeSpec::Profile::bowl:
          h = bowl_value(u, v, spec.asymmetry);
          break;
        case SyntheticLakeSpec::Profile::tilted_plane:
          h = 0.25 + 0.5 * ((1.0 - spec.asymmetry) * u + spec.asymmetry * v);
          break;
        case SyntheticLakeSpec::Profile::ridge: {
          const double across = std::max(0.0, 1.0 - (2.0 * u - 1.0) * (2.0 * u - 1.0));
          const double along = 1.0 - 0.5 * spec.asymmetry * (1.0 - v);
          h = across * along;
          break;
        }
        case SyntheticLakeSpec::Profile::twin_basin: {
          const double deep = basin(u, v, 0.32, 0.52, 0.30, 0.34);
          const double shallow = basin(u, v, 0.72, 0.44, 0.26, 0.30);
          h = std::max(deep, (0.55 + 0.2 * spec.asymmetry) * shallow);
          break;
        }
      }
      heights[static_cast<std::size_t>(r) * nc + c] = spec.max_height * h;
    }
  }

  if (spec.noise_amplitude > 0.0) {
    const std::vector<double> noise = smooth_noise(nc, nr, spec.seed);
    for (std::size_t i = 0; i < heights.size(); ++i) {
      heights[i] = std::max(0.0, heights[i] + spec.noise_amplitude * noise[i]);
    }
  }

  if (zero_ring) {
    for (int c = 0; c < nc; ++c) {
      heights[c] = 0.0;
      heights[static_cast<std::size_t>(nr - 1) * nc + c] = 0.0;
    }
    for (int r = 0; r < nr; ++r) {
      heights[static_cast<std::size_t>(r) * nc] = 0.0;
      heights[static_cast<std::size_t>(r) * nc + (nc - 1)] = 0.0;
    }
  }

  return BathymetryGrid(nc, nr, spec.cell_size, 0.0, 0.0, std::move(heights));
}

} // namespace bathyloc
