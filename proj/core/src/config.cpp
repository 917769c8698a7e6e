#include "eldiff/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "eldiff/errors.hpp"

namespace eldiff {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

class ValueParser {
 public:
  ValueParser(std::string_view text, int line) : s_(text), line_(line) {}

  ConfigValue parse() {
    ConfigValue v = value();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return v;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  ConfigValue value() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '[') return list();
    std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '[') ++pos_;
    ConfigValue v;
    v.scalar = trim(s_.substr(start, pos_ - start));
    if (v.scalar.empty()) fail("empty value");
    return v;
  }

  ConfigValue list() {
    ++pos_;
    ConfigValue v;
    v.is_list = true;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return v;
    }
    for (;;) {
      v.items.push_back(value());
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated list");
      if (s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      if (s_[pos_] != ',') fail("expected ',' or ']'");
      ++pos_;
    }
  }
};

int bracket_depth(std::string_view s) {
  int d = 0;
  for (char c : s) d += (c == '[') - (c == ']');
  return d;
}

double as_double(const ConfigValue& v, const std::string& key) {
  if (v.is_list) throw ConfigError(key + ": expected a number");
  double out = 0.0;
  const char* b = v.scalar.data();
  const char* e = b + v.scalar.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e) throw ConfigError(key + ": not a number: '" + v.scalar + "'");
  return out;
}

long long as_int(const ConfigValue& v, const std::string& key) {
  if (v.is_list) throw ConfigError(key + ": expected an integer");
  long long out = 0;
  const char* b = v.scalar.data();
  const char* e = b + v.scalar.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e) throw ConfigError(key + ": not an integer: '" + v.scalar + "'");
  return out;
}

template <class T, class F>
std::vector<T> as_list(const ConfigValue& v, const std::string& key, F&& conv) {
  if (!v.is_list) throw ConfigError(key + ": expected a list");
  std::vector<T> out;
  for (const auto& item : v.items) out.push_back(static_cast<T>(conv(item, key)));
  return out;
}

std::vector<ProfileTerm> as_modes(const ConfigValue& v, const std::string& key, int dim) {
  if (!v.is_list) throw ConfigError(key + ": expected a list of modes");
  std::vector<ProfileTerm> out;
  for (const auto& entry : v.items) {
    const auto& f = entry.items;
    if (!entry.is_list || static_cast<int>(f.size()) != dim + 2) {
      throw ConfigError(key + ": each mode needs " + std::to_string(dim) +
                        " wavenumbers, a kind and an amplitude");
    }
    ProfileTerm term;
    for (int j = 0; j < dim; ++j) term.mode[j] = static_cast<int>(as_int(f[j], key));
    const std::string& kind = f[dim].scalar;
    if (kind == "cos") {
      term.kind = TrigKind::Cos;
    } else if (kind == "sin") {
      term.kind = TrigKind::Sin;
    } else {
      throw ConfigError(key + ": mode kind must be cos or sin, got '" + kind + "'");
    }
    term.amplitude = as_double(f[dim + 1], key);
    out.push_back(term);
  }
  return out;
}

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::string pending;
  int pending_line = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    if (!pending.empty()) {
      pending += ' ' + line;
    } else {
      if (trim(line).empty()) continue;
      pending = line;
      pending_line = line_no;
    }
    if (bracket_depth(pending) > 0) continue;

    auto eq = pending.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(pending_line) + ": expected key = value");
    }
    std::string key = trim(std::string_view(pending).substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(pending_line) + ": empty key");
    if (table.count(key)) {
      throw ConfigError("line " + std::to_string(pending_line) + ": duplicate key '" + key + "'");
    }
    table[key] = ValueParser(std::string_view(pending).substr(eq + 1), pending_line).parse();
    pending.clear();
  }
  if (!pending.empty()) {
    throw ConfigError("line " + std::to_string(pending_line) + ": unbalanced brackets");
  }
  return table;
}

Params ExperimentConfig::params(double lambda) const {
  Params p;
  p.lambda = lambda;
  p.mu = mu;
  p.dim = dim;
  p.kappa0 = kappa0;
  return p;
}

StepControl ExperimentConfig::npns_control() const {
  StepControl c;
  c.dt = dt;
  c.cfl_advect = cfl_advect;
  c.cfl_relax = cfl_relax;
  c.fixed_dt = dt_policy == DtPolicy::Fixed;
  return c;
}

StepControl ExperimentConfig::limit_control() const {
  StepControl c = npns_control();
  c.dt = limit_dt;
  return c;
}

ExperimentConfig config_from_table(const ConfigTable& table) {
  ExperimentConfig c;
  auto get = [&](const char* key) -> const ConfigValue* {
    auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
  };
  // dim first: mode lists depend on it.
  if (auto* v = get("dim")) c.dim = static_cast<int>(as_int(*v, "dim"));
  if (c.dim != 2 && c.dim != 3) throw ConfigError("dim must be 2 or 3");
  c.v0.assign(c.dim, ProfileSpec{});

  static const char* axis_keys[3] = {"v0_modes_x", "v0_modes_y", "v0_modes_z"};
  for (const auto& [key, v] : table) {
    if (key == "dim") {
    } else if (key == "n") {
      c.n = static_cast<int>(as_int(v, key));
    } else if (key == "mu") {
      c.mu = as_double(v, key);
    } else if (key == "kappa0") {
      c.kappa0 = as_double(v, key);
    } else if (key == "lambdas") {
      c.lambdas = as_list<double>(v, key, as_double);
    } else if (key == "final_time") {
      c.final_time = as_double(v, key);
    } else if (key == "snapshots") {
      c.snapshots = static_cast<int>(as_int(v, key));
    } else if (key == "dt_policy") {
      if (v.scalar == "auto") {
        c.dt_policy = DtPolicy::Auto;
      } else if (v.scalar == "fixed") {
        c.dt_policy = DtPolicy::Fixed;
      } else {
        throw ConfigError("dt_policy must be auto or fixed");
      }
    } else if (key == "dt") {
      c.dt = as_double(v, key);
    } else if (key == "limit_dt") {
      c.limit_dt = as_double(v, key);
    } else if (key == "cfl_advect") {
      c.cfl_advect = as_double(v, key);
    } else if (key == "cfl_relax") {
      c.cfl_relax = as_double(v, key);
    } else if (key == "seed") {
      auto s = as_int(v, key);
      if (s < 0) throw ConfigError("seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "output_dir") {
      c.output_dir = v.scalar;
    } else if (key == "z0_offset") {
      c.z0.offset = as_double(v, key);
    } else if (key == "z0_modes") {
      c.z0.terms = as_modes(v, key, c.dim);
    } else if (key == "doping_offset") {
      c.doping.offset = as_double(v, key);
    } else if (key == "doping_modes") {
      c.doping.terms = as_modes(v, key, c.dim);
    } else if (key == axis_keys[0] || key == axis_keys[1] || key == axis_keys[2]) {
      int axis = key.back() - 'x';
      if (axis >= c.dim) throw ConfigError(key + " given for a " + std::to_string(c.dim) + "D run");
      c.v0[axis].terms = as_modes(v, key, c.dim);
    } else if (key == "mms_n") {
      c.mms.n = static_cast<int>(as_int(v, key));
    } else if (key == "mms_lambda") {
      c.mms.lambda = as_double(v, key);
    } else if (key == "mms_final_time") {
      c.mms.final_time = as_double(v, key);
    } else if (key == "mms_dts") {
      c.mms.dts = as_list<double>(v, key, as_double);
    } else if (key == "mms_grid_sizes") {
      c.mms.grid_sizes = as_list<int>(v, key, as_int);
    } else if (key == "mms_spatial_dt") {
      c.mms.spatial_dt = as_double(v, key);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  validate_config(c);
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  return config_from_table(parse_config_text(text));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig c;
  try {
    c = parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) c.output_dir = env;
  return c;
}

void validate_config(const ExperimentConfig& c) {
  auto power_of_two = [](int n) { return n >= 8 && (n & (n - 1)) == 0; };
  if (c.dim != 2 && c.dim != 3) throw ConfigError("dim must be 2 or 3");
  if (!power_of_two(c.n)) throw ConfigError("n must be a power of two >= 8");
  if (!(c.mu > 0.0)) throw ConfigError("mu must be positive");
  if (!(c.kappa0 > 0.0)) throw ConfigError("kappa0 must be positive");
  if (c.lambdas.empty()) throw ConfigError("lambdas must not be empty");
  for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
    const double l = c.lambdas[i];
    if (!(l > 0.0 && l <= 0.5)) throw ConfigError("lambdas must lie in (0, 0.5]");
    if (i > 0 && !(l < c.lambdas[i - 1])) throw ConfigError("lambdas must be strictly decreasing");
  }
  if (c.snapshots < 5) throw ConfigError("snapshots must be at least 5");
  if (!(c.final_time > 0.0)) throw ConfigError("final_time must be positive");
  if (!(c.dt > 0.0) || !(c.limit_dt > 0.0)) throw ConfigError("dt and limit_dt must be positive");
  if (!(c.cfl_advect > 0.0) || !(c.cfl_relax > 0.0)) throw ConfigError("CFL factors must be positive");
  if (!power_of_two(c.mms.n)) throw ConfigError("mms_n must be a power of two >= 8");
  for (int n : c.mms.grid_sizes) {
    if (!power_of_two(n)) throw ConfigError("mms_grid_sizes entries must be powers of two >= 8");
  }
  if (std::any_of(c.mms.dts.begin(), c.mms.dts.end(), [](double d) { return !(d > 0.0); })) {
    throw ConfigError("mms_dts must be positive");
  }
  if (!(c.mms.lambda > 0.0) || !(c.mms.final_time > 0.0) || !(c.mms.spatial_dt > 0.0)) {
    throw ConfigError("mms_lambda, mms_final_time and mms_spatial_dt must be positive");
  }
}

}  // namespace eldiff
