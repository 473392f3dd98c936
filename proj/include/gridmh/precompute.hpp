#pragma once

#include "gridmh/core.hpp"
#include "gridmh/grid.hpp"
#include "gridmh/models.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gridmh {

/// Problems reading a pre-computation file. Each failure mode has its own type.
class PrecompFileError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};
class UnknownVersion : public PrecompFileError {
 public:
  using PrecompFileError::PrecompFileError;
};
class TruncatedFile : public PrecompFileError {
 public:
  using PrecompFileError::PrecompFileError;
};
class ChecksumMismatch : public PrecompFileError {
 public:
  using PrecompFileError::PrecompFileError;
};
class CorruptFile : public PrecompFileError {
 public:
  using PrecompFileError::PrecompFileError;
};

/// The grid plus n stored statistic vectors per grid point. Immutable.
class PrecompData {
 public:
  /// `stats[m]` is an n x d matrix of statistics drawn at grid point m.
  PrecompData(GrfModel model, Grid grid, int n, std::vector<Matrix> stats, std::uint64_t seed, int sweeps);

  const GrfModel& model() const { return model_; }
  const Grid& grid() const { return grid_; }
  int n() const { return n_; }
  int dims() const { return grid_.dims(); }
  std::size_t size() const { return grid_.size(); }
  const Matrix& stats(std::size_t m) const { return stats_.at(m); }
  std::uint64_t seed() const { return seed_; }
  int sweeps() const { return sweeps_; }

  std::size_t nearest(const Vector& theta) const { return grid_.nearest(theta); }
  Vector eigen_coords(const Vector& theta) const { return grid_.eigen_coords(theta); }
  SupportBox support() const { return grid_.support(); }

  bool operator==(const PrecompData& other) const;

 private:
  GrfModel model_;
  Grid grid_;
  int n_;
  std::vector<Matrix> stats_;
  std::uint64_t seed_;
  int sweeps_;
};

/// n auxiliary draws per grid point, reduced to statistics. Grid point m uses the
/// stream derived from (seed, m), so the result does not depend on `threads`.
PrecompData run_precompute(const GrfModel& model, const Grid& grid, int n, int sweeps, std::uint64_t seed,
                           int threads = 0);

std::size_t nearest_grid_point(const PrecompData& precomp, const Vector& theta);

void write_precomp(std::ostream& out, const PrecompData& precomp);
PrecompData read_precomp(std::istream& in);
void save_precomp(const PrecompData& precomp, const std::string& path);
PrecompData load_precomp(const std::string& path);

/// CRC-64/XZ of a byte string, the checksum used by the file format.
std::uint64_t crc64(const std::string& bytes);

}  // namespace gridmh
