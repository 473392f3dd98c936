#include "gridmh/precompute.hpp"

#include "gridmh/parallel.hpp"
#include "gridmh/rng.hpp"

#include <boost/crc.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace gridmh {

namespace {

constexpr const char* kMagic = "gridmh-precomp";
constexpr const char* kVersion = "v1";

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_real(const std::string& tok, std::size_t line_no) {
  double value = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw CorruptFile("line " + std::to_string(line_no) + ": bad real '" + tok + "'");
  }
  return value;
}

long long parse_int(const std::string& tok, std::size_t line_no) {
  long long value = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw CorruptFile("line " + std::to_string(line_no) + ": bad integer '" + tok + "'");
  }
  return value;
}

std::uint64_t parse_u64(const std::string& tok, std::size_t line_no, int base = 10) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value, base);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw CorruptFile("line " + std::to_string(line_no) + ": bad unsigned '" + tok + "'");
  }
  return value;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Walks the lines of a file, checking keyword prefixes and field counts.
class LineReader {
 public:
  explicit LineReader(const std::vector<std::string>& lines) : lines_(lines) {}

  std::vector<std::string> next(std::size_t expected_fields) {
    if (pos_ >= lines_.size()) throw CorruptFile("body shorter than the header declares");
    auto fields = split(lines_[pos_++]);
    if (fields.size() != expected_fields) {
      throw CorruptFile("line " + std::to_string(pos_) + ": expected " + std::to_string(expected_fields) +
                        " fields, got " + std::to_string(fields.size()));
    }
    return fields;
  }

  std::string keyed(const std::string& key) {
    auto fields = next(2);
    if (fields[0] != key) throw CorruptFile("line " + std::to_string(pos_) + ": expected '" + key + "'");
    return fields[1];
  }

  std::size_t line_no() const { return pos_; }
  bool done() const { return pos_ == lines_.size(); }

 private:
  const std::vector<std::string>& lines_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t crc64(const std::string& bytes) {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

PrecompData::PrecompData(GrfModel model, Grid grid, int n, std::vector<Matrix> stats, std::uint64_t seed,
                         int sweeps)
    : model_(std::move(model)), grid_(std::move(grid)), n_(n), stats_(std::move(stats)), seed_(seed), sweeps_(sweeps) {
  if (n_ < 0) throw ValidationError("precomputed draw count must be >= 0");
  if (grid_.dims() != model_.dims()) throw DimensionMismatch("grid dimension differs from model dimension");
  if (stats_.size() != grid_.size()) throw InvalidState("one statistics block per grid point is required");
  for (const auto& block : stats_) {
    if (block.rows() != n_ || block.cols() != grid_.dims()) throw InvalidState("statistics block has the wrong shape");
    if (!block.allFinite()) throw NumericalError("stored statistics must be finite");
  }
}

bool PrecompData::operator==(const PrecompData& other) const {
  return model_ == other.model_ && grid_ == other.grid_ && n_ == other.n_ && stats_ == other.stats_ &&
         seed_ == other.seed_ && sweeps_ == other.sweeps_;
}

PrecompData run_precompute(const GrfModel& model, const Grid& grid, int n, int sweeps, std::uint64_t seed,
                           int threads) {
  if (n < 1) throw ValidationError("pre-computation needs n >= 1");
  if (grid.dims() != model.dims()) throw DimensionMismatch("grid dimension differs from model dimension");
  std::vector<Matrix> stats(grid.size(), Matrix(n, grid.dims()));
  parallel_for(grid.size(), threads, [&](std::size_t m) {
    Rng rng = make_stream(seed, m);
    const Vector& theta = grid.point(m).theta;
    for (int k = 0; k < n; ++k) stats[m].row(k) = sample_stats(model, theta, sweeps, rng).transpose();
  });
  return PrecompData(model, grid, n, std::move(stats), seed, sweeps);
}

std::size_t nearest_grid_point(const PrecompData& precomp, const Vector& theta) { return precomp.nearest(theta); }

void write_precomp(std::ostream& out, const PrecompData& p) {
  std::string body;
  auto line = [&body](const std::string& s) {
    body += s;
    body += '\n';
  };
  auto reals = [](const auto& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) s += ' ';
      s += format_real(v[i]);
    }
    return s;
  };
  const Grid& g = p.grid();
  const int d = g.dims();
  line(std::string(kMagic) + " " + kVersion);
  std::string model = "model " + to_string(p.model().kind());
  for (int s : p.model().size()) model += " " + std::to_string(s);
  line(model);
  line("seed " + std::to_string(p.seed()));
  line("sweeps " + std::to_string(p.sweeps()));
  line("d " + std::to_string(d));
  line("eps " + format_real(g.eps()));
  line("M " + std::to_string(g.size()));
  line("n " + std::to_string(p.n()));
  line(reals(g.mode()));
  for (int r = 0; r < d; ++r) line(reals(Vector(g.eigvecs().row(r).transpose())));
  line(reals(g.eigvals()));
  for (std::size_t m = 0; m < g.size(); ++m) {
    const auto& pt = g.point(m);
    std::string head = "point " + std::to_string(m);
    for (int c : pt.coords) head += " " + std::to_string(c);
    head += " " + reals(pt.theta);
    line(head);
    const Matrix& block = p.stats(m);
    for (Eigen::Index k = 0; k < block.rows(); ++k) line(reals(Vector(block.row(k).transpose())));
  }
  out << body << hex16(crc64(body)) << '\n';
}

PrecompData read_precomp(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.empty()) throw TruncatedFile("empty pre-computation file");

  const auto first_nl = text.find('\n');
  const auto magic = split(text.substr(0, first_nl));
  if (magic.size() != 2 || magic[0] != kMagic) throw CorruptFile("not a pre-computation file");
  if (magic[1] != kVersion) throw UnknownVersion("unsupported pre-computation format version '" + magic[1] + "'");

  if (text.back() != '\n') throw TruncatedFile("pre-computation file does not end with a complete line");
  const auto last_start = text.rfind('\n', text.size() - 2);
  if (last_start == std::string::npos) throw TruncatedFile("pre-computation file has no checksum line");
  const std::string body = text.substr(0, last_start + 1);
  const std::string checksum_line = text.substr(last_start + 1, text.size() - last_start - 2);
  const bool checksum_shaped =
      checksum_line.size() == 16 && checksum_line.find_first_not_of("0123456789abcdef") == std::string::npos;
  if (!checksum_shaped) throw TruncatedFile("pre-computation file is missing its checksum line");

  std::vector<std::string> lines;
  {
    std::istringstream body_in(body);
    std::string l;
    while (std::getline(body_in, l)) lines.push_back(l);
  }
  LineReader reader(lines);
  reader.next(2);

  auto model_fields = split(lines.size() > 1 ? lines[1] : std::string());
  if (model_fields.size() < 2 || model_fields[0] != "model") throw CorruptFile("line 2: expected 'model'");
  reader.next(model_fields.size());
  std::vector<int> size;
  for (std::size_t i = 2; i < model_fields.size(); ++i) size.push_back(static_cast<int>(parse_int(model_fields[i], 2)));
  const GrfModel model = [&] {
    try {
      return GrfModel::from_kind(parse_model_kind(model_fields[1]), size);
    } catch (const ValidationError& e) {
      throw CorruptFile(std::string("model line: ") + e.what());
    }
  }();

  const std::uint64_t seed = parse_u64(reader.keyed("seed"), reader.line_no());
  const int sweeps = static_cast<int>(parse_int(reader.keyed("sweeps"), reader.line_no()));
  const long long d = parse_int(reader.keyed("d"), reader.line_no());
  const double eps = parse_real(reader.keyed("eps"), reader.line_no());
  const long long count = parse_int(reader.keyed("M"), reader.line_no());
  const long long n = parse_int(reader.keyed("n"), reader.line_no());
  if (d != model.dims()) throw CorruptFile("header d does not match the model");
  if (count < 1 || n < 0) throw CorruptFile("header M or n out of range");
  const std::size_t expected_lines = 8 + 1 + static_cast<std::size_t>(d) + 1 +
                                     static_cast<std::size_t>(count) * (1 + static_cast<std::size_t>(n));
  if (lines.size() != expected_lines) {
    throw CorruptFile("body has " + std::to_string(lines.size()) + " lines, header implies " +
                      std::to_string(expected_lines));
  }

  auto read_vector = [&](std::size_t len) {
    const auto fields = reader.next(len);
    Vector v(static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < len; ++i) v[static_cast<Eigen::Index>(i)] = parse_real(fields[i], reader.line_no());
    return v;
  };
  const Vector mode = read_vector(static_cast<std::size_t>(d));
  Matrix eigvecs(d, d);
  for (long long r = 0; r < d; ++r) eigvecs.row(r) = read_vector(static_cast<std::size_t>(d)).transpose();
  const Vector eigvals = read_vector(static_cast<std::size_t>(d));

  Grid grid = [&] {
    try {
      return Grid(mode, eigvecs, eigvals, eps);
    } catch (const Error& e) {
      throw CorruptFile(std::string("grid header: ") + e.what());
    }
  }();
  std::vector<Matrix> stats;
  stats.reserve(static_cast<std::size_t>(count));
  for (long long m = 0; m < count; ++m) {
    const auto head = reader.next(2 + 2 * static_cast<std::size_t>(d));
    if (head[0] != "point" || parse_int(head[1], reader.line_no()) != m) {
      throw CorruptFile("line " + std::to_string(reader.line_no()) + ": expected 'point " + std::to_string(m) + "'");
    }
    Coords coords(static_cast<std::size_t>(d));
    for (long long i = 0; i < d; ++i) coords[i] = static_cast<int>(parse_int(head[2 + i], reader.line_no()));
    if (grid.find(coords)) throw CorruptFile("duplicate grid coordinates at point " + std::to_string(m));
    grid.add(coords);
    Matrix block(n, d);
    for (long long k = 0; k < n; ++k) block.row(k) = read_vector(static_cast<std::size_t>(d)).transpose();
    stats.push_back(std::move(block));
  }

  const std::uint64_t stored = parse_u64(checksum_line, lines.size() + 1, 16);
  if (stored != crc64(body)) throw ChecksumMismatch("pre-computation checksum mismatch");

  try {
    return PrecompData(model, std::move(grid), static_cast<int>(n), std::move(stats), seed, sweeps);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw CorruptFile(e.what());
  }
}

void save_precomp(const PrecompData& precomp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  write_precomp(out, precomp);
  if (!out) throw Error("write to '" + path + "' failed");
}

PrecompData load_precomp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_precomp(in);
}

}  // namespace gridmh
