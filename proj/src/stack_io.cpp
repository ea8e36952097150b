#include "tomomotion/stack_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>
#include <zlib.h>

namespace tomomotion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void append_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.append(bytes, 8);
}

double read_le(const char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

std::string encode_frames(const ProjectionStack& stack) {
  std::string blob;
  blob.reserve(stack.size() * stack.geometry.pixels() * 8);
  for (const Frame& f : stack.frames) {
    for (double v : f) append_le(blob, v);
  }
  return blob;
}

std::uint32_t crc32_of(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset),
                static_cast<uInt>(chunk));
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

template <typename T>
T header_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(key, "missing from stack header");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError(where, "not a number: '" + s + "'");
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s, const std::string& where) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, where);
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Non-finite values (frames of zero mass) are written as empty cells.
std::string finite_cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

double parse_or_nan(const std::string& s, const std::string& where) {
  return s.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(s, where);
}

// Data lines of a CSV file with its header removed; comment lines go to `comments`.
std::vector<std::vector<std::string>> read_csv(const fs::path& path,
                                               const std::vector<std::string>& expected,
                                               std::vector<std::string>* comments = nullptr) {
  std::istringstream in(read_file(path));
  std::string line;
  bool have_header = false;
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (comments) comments->push_back(line);
      continue;
    }
    auto cells = split(line, ',');
    if (!have_header) {
      if (cells != expected) {
        throw ConfigError(path.string(), "unexpected CSV header '" + line + "'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != expected.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no),
                        "expected " + std::to_string(expected.size()) + " columns");
    }
    rows.push_back(std::move(cells));
  }
  if (!have_header) throw ConfigError(path.string(), "missing CSV header");
  return rows;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

const std::vector<std::string> kTruthColumns = {"t",   "T1",  "T2",  "T3",  "alpha", "phi",
                                                "omega3", "R11", "R12", "R13", "R21", "R22",
                                                "R23", "R31", "R32", "R33"};

const std::vector<std::string> kEstimateColumns = {
    "t",     "c2x",           "c2y",             "Tx",              "Ty",    "phi", "omega3",
    "alpha", "phi_objective", "omega3_residual", "alpha_condition", "flags"};

ErrorSummary summarize(std::vector<double> values) {
  ErrorSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.max = values.back();
  const std::size_t m = values.size() / 2;
  s.median = values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
  return s;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint32_t stack_checksum(const ProjectionStack& stack) {
  return crc32_of(encode_frames(stack));
}

void write_stack(const ProjectionStack& stack, const fs::path& dir) {
  stack.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const std::string blob = encode_frames(stack);
  json header;
  header["format"] = "tomomotion-stack";
  header["version"] = 1;
  header["dims"] = {stack.geometry.n1, stack.geometry.n2};
  header["spacing"] = stack.geometry.spacing;
  header["origin2"] = {stack.geometry.origin2.x(), stack.geometry.origin2.y()};
  header["dt"] = stack.dt;
  header["t0"] = stack.t0;
  header["n_frames"] = stack.size();
  header["dtype"] = "float64";
  header["byte_order"] = "little";
  header["layout"] = "frame,x2,x1";
  header["blob"] = kStackBlob;
  header["checksum"] = "crc32:" + hex32(crc32_of(blob));
  write_file_atomic(dir / kStackBlob, blob);
  write_file_atomic(dir / kStackHeader, header.dump(2) + "\n");
}

ProjectionStack read_stack(const fs::path& dir) {
  json header;
  try {
    header = json::parse(read_file(dir / kStackHeader));
  } catch (const json::parse_error& e) {
    throw ConfigError(kStackHeader, e.what());
  }
  if (header_field<std::string>(header, "byte_order") != "little") {
    throw ConfigError("byte_order", "only little-endian stacks are supported");
  }
  if (header_field<std::string>(header, "dtype") != "float64") {
    throw ConfigError("dtype", "only float64 stacks are supported");
  }
  const auto dims = header_field<std::vector<std::size_t>>(header, "dims");
  if (dims.size() != 2) throw ConfigError("dims", "expected two entries");
  const auto origin = header_field<std::vector<double>>(header, "origin2");
  if (origin.size() != 2) throw ConfigError("origin2", "expected two entries");

  ProjectionStack stack;
  stack.geometry.n1 = dims[0];
  stack.geometry.n2 = dims[1];
  stack.geometry.spacing = header_field<double>(header, "spacing");
  stack.geometry.origin2 = Vec2(origin[0], origin[1]);
  stack.dt = header_field<double>(header, "dt");
  stack.t0 = header.contains("t0") ? header_field<double>(header, "t0") : 0.0;
  const auto n_frames = header_field<std::size_t>(header, "n_frames");
  const std::string blob_name =
      header.contains("blob") ? header_field<std::string>(header, "blob") : kStackBlob;

  const std::string blob = read_file(dir / blob_name);
  const std::size_t pixels = stack.geometry.pixels();
  if (blob.size() != n_frames * pixels * 8) {
    throw IoError("stack blob has " + std::to_string(blob.size()) + " bytes, header implies " +
                  std::to_string(n_frames * pixels * 8));
  }
  const std::string expected = header_field<std::string>(header, "checksum");
  const std::string actual = "crc32:" + hex32(crc32_of(blob));
  if (expected != actual) {
    throw IoError("stack checksum mismatch: header " + expected + ", data " + actual);
  }
  stack.frames.assign(n_frames, Frame(pixels));
  for (std::size_t l = 0; l < n_frames; ++l) {
    const char* base = blob.data() + l * pixels * 8;
    for (std::size_t i = 0; i < pixels; ++i) stack.frames[l][i] = read_le(base + 8 * i);
  }
  stack.validate();
  return stack;
}

TruthTable truth_table(const MotionGroundTruth& motion, const std::optional<Vec3>& c3) {
  TruthTable t;
  t.times = motion.times;
  t.translation = motion.translation;
  t.alpha = motion.angular.alpha();
  t.phi = motion.angular.phi();
  t.omega3 = motion.angular.omega3();
  t.rotation = motion.rotation.matrices();
  t.c3 = c3;
  return t;
}

void write_truth_csv(const TruthTable& truth, const fs::path& path) {
  std::string out;
  if (truth.c3) {
    out += "# c3," + format_double(truth.c3->x()) + "," + format_double(truth.c3->y()) + "," +
           format_double(truth.c3->z()) + "\n";
  }
  out += join(kTruthColumns, ',') + "\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    std::vector<std::string> cells = {
        format_double(truth.times[i]),          format_double(truth.translation[i].x()),
        format_double(truth.translation[i].y()), format_double(truth.translation[i].z()),
        format_double(truth.alpha[i]),           format_double(truth.phi[i]),
        format_double(truth.omega3[i])};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) cells.push_back(format_double(truth.rotation[i](r, c)));
    }
    out += join(cells, ',') + "\n";
  }
  write_file_atomic(path, out);
}

TruthTable read_truth_csv(const fs::path& path) {
  std::vector<std::string> comments;
  const auto rows = read_csv(path, kTruthColumns, &comments);
  TruthTable t;
  for (const auto& c : comments) {
    if (c.rfind("# c3,", 0) == 0) {
      const auto cells = split(c.substr(5), ',');
      if (cells.size() != 3) throw ConfigError("c3", "expected three coordinates");
      t.c3 = Vec3(parse_double(cells[0], "c3"), parse_double(cells[1], "c3"),
                  parse_double(cells[2], "c3"));
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = path.string() + ":row " + std::to_string(i + 1);
    t.times.push_back(parse_double(r[0], where));
    t.translation.emplace_back(parse_double(r[1], where), parse_double(r[2], where),
                               parse_double(r[3], where));
    t.alpha.push_back(parse_double(r[4], where));
    t.phi.push_back(parse_double(r[5], where));
    t.omega3.push_back(parse_double(r[6], where));
    Mat3 m;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) m(a, b) = parse_double(r[7 + 3 * a + b], where);
    }
    t.rotation.push_back(m);
  }
  return t;
}

void write_estimate_csv(const MotionEstimate& est, const fs::path& path) {
  std::string out = join(kEstimateColumns, ',') + "\n";
  for (std::size_t l = 0; l < est.size(); ++l) {
    std::string tx;
    std::string ty;
    if (est.translation_xy) {
      tx = finite_cell((*est.translation_xy)[l].x());
      ty = finite_cell((*est.translation_xy)[l].y());
    }
    const std::vector<std::string> cells = {
        format_double(est.times[l]),  finite_cell(est.c2[l].x()),   finite_cell(est.c2[l].y()),
        tx,                           ty,                           cell(est.phi[l]),
        cell(est.omega3[l]),          cell(est.alpha[l]),           cell(est.phi_objective[l]),
        cell(est.omega3_residual[l]), cell(est.alpha_condition[l]), join(est.flags[l], ';')};
    out += join(cells, ',') + "\n";
  }
  write_file_atomic(path, out);
}

MotionEstimate read_estimate_csv(const fs::path& path) {
  const auto rows = read_csv(path, kEstimateColumns);
  MotionEstimate est;
  bool has_translation = false;
  std::vector<Vec2> txy;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = path.string() + ":row " + std::to_string(i + 1);
    est.times.push_back(parse_double(r[0], where));
    est.c2.emplace_back(parse_or_nan(r[1], where), parse_or_nan(r[2], where));
    txy.emplace_back(parse_or_nan(r[3], where), parse_or_nan(r[4], where));
    has_translation = has_translation || !r[3].empty();
    est.phi.push_back(parse_optional(r[5], where));
    est.omega3.push_back(parse_optional(r[6], where));
    est.alpha.push_back(parse_optional(r[7], where));
    est.phi_objective.push_back(parse_optional(r[8], where));
    est.omega3_residual.push_back(parse_optional(r[9], where));
    est.alpha_condition.push_back(parse_optional(r[10], where));
    est.flags.push_back(r[11].empty() ? std::vector<std::string>{} : split(r[11], ';'));
  }
  if (has_translation) est.translation_xy = std::move(txy);
  est.phi_unwrapped = unwrap_mod_pi(est.phi);
  return est;
}

Comparison compare_estimate(const MotionEstimate& est, const TruthTable& truth) {
  if (est.size() != truth.size()) {
    throw InvalidArgument("compare: estimate has " + std::to_string(est.size()) +
                          " rows, truth has " + std::to_string(truth.size()));
  }
  Comparison cmp;
  std::vector<double> txy, phi, omega3, alpha;
  for (std::size_t l = 0; l < est.size(); ++l) {
    const double t = truth.times[l];
    if (std::abs(est.times[l] - t) > 1e-9 * std::max(1.0, std::abs(t))) {
      throw InvalidArgument("compare: timestamp mismatch at row " + std::to_string(l + 1));
    }
    ComparisonRow row;
    row.t = t;
    if (est.translation_xy && (*est.translation_xy)[l].allFinite()) {
      row.txy = ((*est.translation_xy)[l] - project(truth.translation[l])).norm();
      txy.push_back(*row.txy);
    }
    if (est.phi[l]) {
      row.phi = std::abs(std::remainder(*est.phi[l] - truth.phi[l], kPi));
      phi.push_back(*row.phi);
    }
    if (est.omega3[l]) {
      row.omega3 = std::abs(*est.omega3[l] - truth.omega3[l]);
      omega3.push_back(*row.omega3);
    }
    if (est.alpha[l]) {
      row.alpha = std::abs(*est.alpha[l] - truth.alpha[l]);
      alpha.push_back(*row.alpha);
    }
    cmp.rows.push_back(row);
  }
  cmp.txy = summarize(txy);
  cmp.phi = summarize(phi);
  cmp.omega3 = summarize(omega3);
  cmp.alpha = summarize(alpha);
  return cmp;
}

void write_comparison_csv(const Comparison& cmp, const fs::path& path) {
  std::string out = "t,err_Txy,err_phi,err_omega3,err_alpha\n";
  for (const auto& r : cmp.rows) {
    out += format_double(r.t) + "," + cell(r.txy) + "," + cell(r.phi) + "," + cell(r.omega3) +
           "," + cell(r.alpha) + "\n";
  }
  auto summary = [&](const char* name, auto pick) {
    out += std::string("# ") + name;
    for (const ErrorSummary* s : {&cmp.txy, &cmp.phi, &cmp.omega3, &cmp.alpha}) {
      out += "," + (s->count ? format_double(pick(*s)) : std::string());
    }
    out += "\n";
  };
  summary("max", [](const ErrorSummary& s) { return s.max; });
  summary("median", [](const ErrorSummary& s) { return s.median; });
  write_file_atomic(path, out);
}

}  // namespace tomomotion
