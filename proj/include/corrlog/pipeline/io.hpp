#pragma once

// File formats: time-series CSV in, .mtrj binary trajectories in and out,
// and the CSV reports (diagnostics, PCA, grid search).

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "corrlog/baselines.hpp"
#include "corrlog/matrix_types.hpp"
#include "corrlog/pipeline/pca.hpp"
#include "corrlog/pipeline/windowing.hpp"
#include "corrlog/regression.hpp"
#include "corrlog/trajectory.hpp"

namespace corrlog {

inline constexpr std::array<char, 5> kTrajectoryMagic{'M', 'T', 'R', 'J', '1'};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size() && !text.empty();
}

template <class T>
void put_le(std::ostream& os, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is, const char* field, std::uint64_t& offset) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw ShapeMismatch(std::string("truncated trajectory file: missing ") + field + " at byte offset " +
                        std::to_string(offset));
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  offset += sizeof(T);
  return value;
}

inline std::ofstream open_output(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode | std::ios::trunc);
  if (!os) throw InvalidArgument("cannot open '" + path + "' for writing");
  return os;
}

inline std::ifstream open_input(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream is(path, mode);
  if (!is) throw InvalidArgument("cannot open '" + path + "'");
  return is;
}

inline void finish_output(std::ostream& os, const std::string& what) {
  os.flush();
  if (!os) throw Error("write failed for " + what);
}

}  // namespace detail

/// Header row of region labels, then one row per time sample. The result
/// stores regions as rows.
inline RegionTimeSeries read_timeseries_csv(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw MalformedHeader("line 1: empty time-series file, expected a header row");
  ++line_no;
  RegionTimeSeries ts;
  for (std::string_view label : detail::split_fields(line)) {
    double dummy = 0.0;
    if (label.empty()) throw MalformedHeader("line 1: empty region label");
    if (detail::parse_double(label, dummy)) {
      throw MalformedHeader("line 1: header field '" + std::string(label) + "' is numeric, expected a region label");
    }
    ts.labels.emplace_back(label);
  }
  const std::size_t n = ts.labels.size();

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != n) {
      throw ShapeMismatch("line " + std::to_string(line_no) + ": " + std::to_string(fields.size()) +
                          " fields, header has " + std::to_string(n));
    }
    for (std::size_t c = 0; c < n; ++c) {
      double x = 0.0;
      if (!detail::parse_double(fields[c], x)) {
        throw DataError("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                        ": cannot parse '" + std::string(fields[c]) + "' as a number");
      }
      if (!std::isfinite(x)) {
        throw NonFiniteValue("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                             ": non-finite value");
      }
      values.push_back(x);
    }
    ++rows;
  }
  if (rows == 0) throw ShapeMismatch("time-series file has a header but no samples");
  ts.data = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                values.data(), static_cast<Index>(rows), static_cast<Index>(n))
                .transpose();
  return ts;
}

inline RegionTimeSeries read_timeseries_csv(const std::string& path) {
  auto is = detail::open_input(path);
  return read_timeseries_csv(is);
}

/// Inverse of read_timeseries_csv. Missing labels become region_<i>.
inline void write_timeseries_csv(std::ostream& os, const RegionTimeSeries& ts) {
  for (Index r = 0; r < ts.n_regions(); ++r) {
    if (r > 0) os << ',';
    const auto i = static_cast<std::size_t>(r);
    os << (i < ts.labels.size() ? ts.labels[i] : "region_" + std::to_string(r));
  }
  os << '\n';
  for (Index s = 0; s < ts.n_samples(); ++s) {
    for (Index r = 0; r < ts.n_regions(); ++r) {
      if (r > 0) os << ',';
      os << detail::format_double(ts.data(r, s));
    }
    os << '\n';
  }
}

inline void write_timeseries_csv(const std::string& path, const RegionTimeSeries& ts) {
  auto os = detail::open_output(path);
  write_timeseries_csv(os, ts);
  detail::finish_output(os, path);
}

inline void write_trajectory(std::ostream& os, const Trajectory& traj) {
  const auto n = static_cast<std::uint64_t>(traj.dim());
  const auto t = static_cast<std::uint64_t>(traj.size());
  if (n > std::numeric_limits<std::uint32_t>::max() || t > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("trajectory too large for the .mtrj format");
  }
  os.write(kTrajectoryMagic.data(), kTrajectoryMagic.size());
  detail::put_le(os, static_cast<std::uint32_t>(n));
  detail::put_le(os, static_cast<std::uint32_t>(t));
  detail::put_le(os, static_cast<std::uint8_t>(traj.tag()));
  for (const Matrix& m : traj.values()) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) detail::put_le(os, m(i, j));
    }
  }
  for (double time : traj.times()) detail::put_le(os, time);
}

inline void write_trajectory(const std::string& path, const Trajectory& traj) {
  auto os = detail::open_output(path, std::ios::binary);
  write_trajectory(os, traj);
  detail::finish_output(os, path);
}

inline Trajectory read_trajectory(std::istream& is) {
  std::array<char, 5> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kTrajectoryMagic) {
    throw MalformedHeader("byte offset 0: missing MTRJ1 magic");
  }
  std::uint64_t offset = magic.size();
  const auto n = detail::get_le<std::uint32_t>(is, "dimension", offset);
  const auto t = detail::get_le<std::uint32_t>(is, "length", offset);
  const std::uint64_t tag_offset = offset;
  const auto raw_tag = detail::get_le<std::uint8_t>(is, "space tag", offset);
  if (n == 0 || t == 0) {
    throw MalformedHeader("byte offset 5: dimension and length must be positive (n=" + std::to_string(n) +
                          ", T=" + std::to_string(t) + ")");
  }
  if (!is_valid_space_tag(raw_tag)) {
    throw MalformedHeader("byte offset " + std::to_string(tag_offset) + ": unknown space tag " +
                          std::to_string(raw_tag));
  }

  std::vector<Matrix> values;
  values.reserve(t);
  for (std::uint32_t k = 0; k < t; ++k) {
    Matrix m(n, n);
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        const std::uint64_t at = offset;
        m(i, j) = detail::get_le<double>(is, "matrix entry", offset);
        if (!std::isfinite(m(i, j))) {
          throw NonFiniteValue("byte offset " + std::to_string(at) + ": non-finite entry in matrix " +
                               std::to_string(k));
        }
      }
    }
    values.push_back(std::move(m));
  }
  std::vector<double> times(t);
  for (std::uint32_t k = 0; k < t; ++k) {
    const std::uint64_t at = offset;
    times[k] = detail::get_le<double>(is, "timestamp", offset);
    if (!std::isfinite(times[k])) {
      throw NonFiniteValue("byte offset " + std::to_string(at) + ": non-finite timestamp");
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw ShapeMismatch("byte offset " + std::to_string(offset) + ": trailing data after " +
                        std::to_string(t) + " timestamps");
  }
  return Trajectory(std::move(times), std::move(values), static_cast<SpaceTag>(raw_tag));
}

inline Trajectory read_trajectory(const std::string& path) {
  auto is = detail::open_input(path, std::ios::binary);
  return read_trajectory(is);
}

/// Columns: time, min_eigenvalue, negative (1 when min_eigenvalue <= 0),
/// deviation_percent, scaling_min, scaling_max. The last three are empty
/// unless the series came from the spd frame.
inline void write_diagnostics_csv(std::ostream& os, const DiagnosticSeries& d) {
  os << "time,min_eigenvalue,negative,deviation_percent,scaling_min,scaling_max\n";
  const bool scaled = !d.scaling_factors.empty();
  for (std::size_t i = 0; i < d.times.size(); ++i) {
    os << detail::format_double(d.times[i]) << ',' << detail::format_double(d.min_eigenvalues[i]) << ','
       << (d.min_eigenvalues[i] <= 0.0 ? 1 : 0) << ',';
    if (scaled) {
      os << detail::format_double(d.deviation_percent[i]) << ','
         << detail::format_double(d.scaling_factors[i].minCoeff()) << ','
         << detail::format_double(d.scaling_factors[i].maxCoeff());
    } else {
      os << ",,";
    }
    os << '\n';
  }
}

inline void write_diagnostics_csv(const std::string& path, const DiagnosticSeries& d) {
  auto os = detail::open_output(path);
  write_diagnostics_csv(os, d);
  detail::finish_output(os, path);
}

/// Columns: time, pc1, pc2, pc3.
inline void write_pca_csv(std::ostream& os, const std::vector<double>& times, const PcaResult& pca) {
  if (static_cast<Index>(times.size()) != pca.coordinates.rows()) {
    throw ShapeMismatch("pca table has " + std::to_string(pca.coordinates.rows()) + " rows for " +
                        std::to_string(times.size()) + " times");
  }
  os << "time,pc1,pc2,pc3\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto r = static_cast<Index>(i);
    os << detail::format_double(times[i]) << ',' << detail::format_double(pca.coordinates(r, 0)) << ','
       << detail::format_double(pca.coordinates(r, 1)) << ',' << detail::format_double(pca.coordinates(r, 2))
       << '\n';
  }
}

inline void write_pca_csv(const std::string& path, const std::vector<double>& times, const PcaResult& pca) {
  auto os = detail::open_output(path);
  write_pca_csv(os, times, pca);
  detail::finish_output(os, path);
}

/// Columns: component, variance, explained_ratio. Rows pc1..pc3, then a
/// `total` row holding the total variance (ratio 1).
inline void write_pca_variance_csv(std::ostream& os, const PcaResult& pca) {
  os << "component,variance,explained_ratio\n";
  for (Index c = 0; c < 3; ++c) {
    os << "pc" << (c + 1) << ',' << detail::format_double(pca.variance(c)) << ','
       << detail::format_double(pca.ratio(c)) << '\n';
  }
  os << "total," << detail::format_double(pca.total_variance) << ",1\n";
}

inline void write_pca_variance_csv(const std::string& path, const PcaResult& pca) {
  auto os = detail::open_output(path);
  write_pca_variance_csv(os, pca);
  detail::finish_output(os, path);
}

/// Long-format heat map. Columns: degree, samples, mse, log10_mse,
/// fit_residual, best (1 on the selected cell).
inline void write_grid_csv(std::ostream& os, const GridSearchResult& g) {
  os << "degree,samples,mse,log10_mse,fit_residual,best\n";
  for (std::size_t r = 0; r < g.degrees.size(); ++r) {
    for (std::size_t c = 0; c < g.sample_counts.size(); ++c) {
      const auto ri = static_cast<Index>(r);
      const auto ci = static_cast<Index>(c);
      const bool best = g.degrees[r] == g.best_degree && g.sample_counts[c] == g.best_samples;
      os << g.degrees[r] << ',' << g.sample_counts[c] << ',' << detail::format_double(g.mse(ri, ci)) << ','
         << detail::format_double(g.log10_mse(ri, ci)) << ',' << detail::format_double(g.fit_residual(ri, ci))
         << ',' << (best ? 1 : 0) << '\n';
    }
  }
}

inline void write_grid_csv(const std::string& path, const GridSearchResult& g) {
  auto os = detail::open_output(path);
  write_grid_csv(os, g);
  detail::finish_output(os, path);
}

}  // namespace corrlog
