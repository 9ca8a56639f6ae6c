#include "ssm2d/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace ssm2d {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': cannot parse number '" + text + "'");
  }
}

std::vector<double> parse_array(const std::string& text, const std::string& key) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(parse_number(trim(item), key));
  if (values.empty()) throw ParseError("key '" + key + "': empty value");
  return values;
}

const char* kArrayKeys[9] = {"a1", "a2", "a3", "a4", "b1", "b2", "c1", "c2", "d"};

struct KeyValues {
  std::map<std::string, std::string> scalar;
  std::map<std::string, std::vector<double>> arrays;  // key without _raw suffix
  std::map<std::string, bool> is_raw;
};

KeyValues split_lines(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");

    bool raw = false;
    std::string base = key;
    if (key.size() > 4 && key.substr(key.size() - 4) == "_raw") {
      raw = true;
      base = key.substr(0, key.size() - 4);
    }
    const bool is_array =
        std::find_if(std::begin(kArrayKeys), std::end(kArrayKeys),
                     [&](const char* k) { return base == k; }) != std::end(kArrayKeys);
    if (is_array) {
      if (kv.arrays.count(base))
        throw ParseError("key '" + key + "': duplicate definition for parameter '" + base + "'");
      kv.arrays[base] = parse_array(value, key);
      kv.is_raw[base] = raw;
    } else {
      if (kv.scalar.count(key)) throw ParseError("key '" + key + "': duplicate definition");
      kv.scalar[key] = value;
    }
  }
  return kv;
}

Field parse_field(const std::string& v) {
  if (v == "real") return Field::kReal;
  if (v == "complex") return Field::kComplex;
  throw ParseError("key 'field': expected 'real' or 'complex', got '" + v + "'");
}

Mode parse_mode(const std::string& v) {
  if (v == "unnormalized") return Mode::kUnnormalized;
  if (v == "normalized") return Mode::kNormalized;
  if (v == "normalized_relaxed") return Mode::kNormalizedRelaxed;
  throw ParseError("key 'mode': expected unnormalized|normalized|normalized_relaxed, got '" + v +
                   "'");
}

Index parse_index(const KeyValues& kv, const std::string& key, Index fallback) {
  auto it = kv.scalar.find(key);
  if (it == kv.scalar.end()) return fallback;
  const double v = parse_number(it->second, key);
  if (v < 1 || v != static_cast<Index>(v))
    throw ParseError("key '" + key + "': expected a positive integer");
  return static_cast<Index>(v);
}

// Slice of one group from a concatenated array key.
Eigen::ArrayXd group_slice(const std::vector<double>& values, Index group, Index per_group,
                           const std::string& key, Index n_ssm) {
  if (static_cast<Index>(values.size()) != per_group * n_ssm)
    throw ParseError("key '" + key + "': expected " + std::to_string(per_group * n_ssm) +
                     " comma-separated values, got " + std::to_string(values.size()));
  Eigen::ArrayXd out(per_group);
  for (Index i = 0; i < per_group; ++i) out[i] = values[group * per_group + i];
  return out;
}

template <class Scalar>
Eigen::ArrayX<Scalar> direct_values(const Eigen::ArrayXd& slice, Index n);

template <>
Eigen::ArrayXd direct_values<double>(const Eigen::ArrayXd& slice, Index) {
  return slice;
}

template <>
Eigen::ArrayXcd direct_values<std::complex<double>>(const Eigen::ArrayXd& slice, Index n) {
  Eigen::ArrayXcd out(n);
  for (Index g = 0; g < n; ++g) out[g] = std::complex<double>(slice[g], slice[n + g]);
  return out;
}

template <class Scalar>
std::vector<SsmParams<Scalar>> build_groups(const KeyValues& kv, Index n, Index n_ssm) {
  constexpr bool complex = ScalarTraits<Scalar>::is_complex;
  const Index per_group = complex ? 2 * n : n;

  std::vector<SsmParams<Scalar>> groups(n_ssm);
  for (Index g = 0; g < n_ssm; ++g) {
    RawParams raw;  // collects raw-keyed entries for this group
    raw.field = complex ? Field::kComplex : Field::kReal;
    SsmParams<Scalar>& p = groups[g];

    auto assign = [&](const char* name, int slot, int kind) {
      // kind: 0 = A, 1 = B, 2 = C
      auto it = kv.arrays.find(name);
      if (it == kv.arrays.end()) throw ParseError(std::string("missing parameter '") + name + "'");
      const Eigen::ArrayXd slice = group_slice(it->second, g, per_group, name, n_ssm);
      const bool is_raw = kv.is_raw.at(name);
      if (is_raw) {
        if constexpr (complex) {
          if (kind == 0) {
            raw.a[slot] = slice.head(n);
            raw.a_angle[slot] = slice.tail(n);
          } else if (kind == 1) {
            raw.b[slot] = slice.head(n);
            raw.b_angle[slot] = slice.tail(n);
          } else {
            raw.c[slot] = slice.head(n);
            raw.c_angle[slot] = slice.tail(n);
          }
        } else {
          if (kind == 0)
            raw.a[slot] = slice;
          else if (kind == 1)
            raw.b[slot] = slice;
          else
            raw.c[slot] = slice;
        }
      } else {
        if (kind == 0)
          p.A[slot] = direct_values<Scalar>(slice, n);
        else if (kind == 1)
          p.B[slot] = direct_values<Scalar>(slice, n);
        else
          p.C[slot] = direct_values<Scalar>(slice, n);
      }
      return is_raw;
    };

    bool any_raw = false;
    const char* a_keys[4] = {"a1", "a2", "a3", "a4"};
    const char* b_keys[2] = {"b1", "b2"};
    const char* c_keys[2] = {"c1", "c2"};
    bool raw_a[4], raw_b[2], raw_c[2];
    for (int i = 0; i < 4; ++i) {
      raw_a[i] = assign(a_keys[i], i, 0);
      any_raw = any_raw || raw_a[i];
    }
    for (int i = 0; i < 2; ++i) {
      raw_b[i] = assign(b_keys[i], i, 1);
      raw_c[i] = assign(c_keys[i], i, 2);
      any_raw = any_raw || raw_b[i] || raw_c[i];
    }

    // d: one value per group or a single shared value; always real.
    auto dit = kv.arrays.find("d");
    if (dit == kv.arrays.end()) throw ParseError("missing parameter 'd'");
    const auto& dvals = dit->second;
    double dv;
    if (static_cast<Index>(dvals.size()) == 1)
      dv = dvals[0];
    else if (static_cast<Index>(dvals.size()) == n_ssm)
      dv = dvals[g];
    else
      throw ParseError("key 'd': expected 1 or n_ssm values, got " +
                       std::to_string(dvals.size()));
    p.D = Eigen::ArrayXd::Constant(1, dv);

    if (any_raw) {
      // Constrain the raw-keyed entries; fill placeholder raws for directly
      // given ones, then overwrite those slots with the direct values.
      RawParams full = raw;
      for (int i = 0; i < 4; ++i)
        if (!raw_a[i]) {
          full.a[i] = Eigen::ArrayXd::Zero(n);
          if (complex) full.a_angle[i] = Eigen::ArrayXd::Zero(n);
        }
      for (int i = 0; i < 2; ++i) {
        if (!raw_b[i]) {
          full.b[i] = Eigen::ArrayXd::Zero(n);
          if (complex) full.b_angle[i] = Eigen::ArrayXd::Zero(n);
        }
        if (!raw_c[i]) {
          full.c[i] = Eigen::ArrayXd::Zero(n);
          if (complex) full.c_angle[i] = Eigen::ArrayXd::Zero(n);
        }
      }
      full.d = p.D;
      SsmParams<Scalar> constrained;
      try {
        constrained = constrain<Scalar>(full);
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
      }
      for (int i = 0; i < 4; ++i)
        if (raw_a[i]) p.A[i] = constrained.A[i];
      for (int i = 0; i < 2; ++i) {
        if (raw_b[i]) p.B[i] = constrained.B[i];
        if (raw_c[i]) p.C[i] = constrained.C[i];
      }
    }

    for (int i = 0; i < 4; ++i)
      if (!p.A[i].allFinite())
        throw ParseError(std::string("key '") + a_keys[i] + "': non-finite value");
    for (int i = 0; i < 2; ++i) {
      if (!p.B[i].allFinite())
        throw ParseError(std::string("key '") + b_keys[i] + "': non-finite value");
      if (!p.C[i].allFinite())
        throw ParseError(std::string("key '") + c_keys[i] + "': non-finite value");
    }
  }
  return groups;
}

void write_u32_le(std::ostream& os, std::uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(buf), 4);
}

void write_f64_le(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint32_t read_u32_le(std::istream& is, const char* what) {
  unsigned char buf[4];
  if (!is.read(reinterpret_cast<char*>(buf), 4))
    throw ParseError(std::string("truncated file while reading ") + what);
  return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
         (static_cast<std::uint32_t>(buf[2]) << 16) | (static_cast<std::uint32_t>(buf[3]) << 24);
}

double read_f64_le(std::istream& is, const char* what) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8))
    throw ParseError(std::string("truncated file while reading ") + what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  return is;
}

void check_magic(std::istream& is, const char* magic) {
  char buf[8];
  if (!is.read(buf, 8) || std::memcmp(buf, magic, 8) != 0)
    throw ParseError(std::string("bad magic, expected '") + magic + "'");
}

}  // namespace

ParamFile parse_params(const std::string& text) {
  const KeyValues kv = split_lines(text);

  ParamFile file;
  auto fit = kv.scalar.find("field");
  if (fit != kv.scalar.end()) file.field = parse_field(fit->second);
  auto mit = kv.scalar.find("mode");
  if (mit != kv.scalar.end()) file.mode = parse_mode(mit->second);
  file.state_dim = parse_index(kv, "n", 1);
  file.n_ssm = parse_index(kv, "n_ssm", 1);
  const Index dirs = parse_index(kv, "directions", 1);
  if (dirs != 1 && dirs != 2 && dirs != 4)
    throw ParseError("key 'directions': expected 1, 2 or 4");
  file.directions = static_cast<int>(dirs);

  for (const auto& [key, _] : kv.scalar)
    if (key != "field" && key != "mode" && key != "n" && key != "n_ssm" && key != "directions")
      throw ParseError("unknown key '" + key + "'");

  if (file.field == Field::kReal)
    file.real_groups = build_groups<double>(kv, file.state_dim, file.n_ssm);
  else
    file.complex_groups = build_groups<std::complex<double>>(kv, file.state_dim, file.n_ssm);
  return file;
}

ParamFile read_params(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_params(buffer.str());
}

void write_kernel_csv(const std::string& path, const Eigen::MatrixXd& k) {
  auto os = open_out(path, false);
  os.precision(17);
  for (Index i = 0; i < k.rows(); ++i) {
    for (Index j = 0; j < k.cols(); ++j) {
      if (j) os << ',';
      os << k(i, j);
    }
    os << '\n';
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

void write_kernel_pgm(const std::string& path, const Eigen::MatrixXd& k) {
  const double lo = k.minCoeff(), hi = k.maxCoeff();
  const double span = hi - lo;
  auto os = open_out(path, false);
  os << "P2\n";
  os << "# kernel " << k.rows() << "x" << k.cols() << ", gray = round(255*(v-min)/(max-min)), min="
     << lo << " max=" << hi << "\n";
  os << k.cols() << " " << k.rows() << "\n255\n";
  for (Index i = 0; i < k.rows(); ++i) {
    for (Index j = 0; j < k.cols(); ++j) {
      const int gray =
          span > 0.0 ? static_cast<int>(std::lround(255.0 * (k(i, j) - lo) / span)) : 0;
      os << gray << (j + 1 == k.cols() ? "" : " ");
    }
    os << '\n';
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

void write_kernel_bin(const std::string& path, const Eigen::MatrixXd& k) {
  auto os = open_out(path, true);
  os.write("SSM2DKRN", 8);
  write_u32_le(os, static_cast<std::uint32_t>(k.rows()));
  write_u32_le(os, static_cast<std::uint32_t>(k.cols()));
  for (Index i = 0; i < k.rows(); ++i)
    for (Index j = 0; j < k.cols(); ++j) write_f64_le(os, k(i, j));
  if (!os) throw IoError("write failed for '" + path + "'");
}

Eigen::MatrixXd read_kernel_bin(const std::string& path) {
  auto is = open_in(path, true);
  check_magic(is, "SSM2DKRN");
  const auto rows = read_u32_le(is, "rows");
  const auto cols = read_u32_le(is, "cols");
  if (rows < 1 || cols < 1) throw ParseError("kernel extents must be >= 1");
  Eigen::MatrixXd k(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) k(i, j) = read_f64_le(is, "kernel payload");
  return k;
}

void write_tensor(const std::string& path, const ImageTensor& t) {
  auto os = open_out(path, true);
  os.write("SSM2DTEN", 8);
  write_u32_le(os, static_cast<std::uint32_t>(t.batch));
  write_u32_le(os, static_cast<std::uint32_t>(t.rows));
  write_u32_le(os, static_cast<std::uint32_t>(t.cols));
  write_u32_le(os, static_cast<std::uint32_t>(t.channels));
  for (double v : t.data) write_f64_le(os, v);
  if (!os) throw IoError("write failed for '" + path + "'");
}

ImageTensor read_tensor(const std::string& path) {
  auto is = open_in(path, true);
  check_magic(is, "SSM2DTEN");
  const auto batch = read_u32_le(is, "batch");
  const auto rows = read_u32_le(is, "rows");
  const auto cols = read_u32_le(is, "cols");
  const auto channels = read_u32_le(is, "channels");
  if (batch < 1 || rows < 1 || cols < 1 || channels < 1)
    throw ParseError("tensor extents must be >= 1");
  ImageTensor t = ImageTensor::zeros(batch, rows, cols, channels);
  for (auto& v : t.data) v = read_f64_le(is, "tensor payload");
  return t;
}

}  // namespace ssm2d
