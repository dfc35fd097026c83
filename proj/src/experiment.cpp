#include "pintgfm/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

namespace pintgfm {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using KeyValues = std::map<std::string, std::string>;

struct RawConfig {
  KeyValues top;
  std::optional<KeyValues> fine, coarse, approx;
  std::vector<KeyValues> methods;
};

RawConfig parse_ini(std::istream& in) {
  RawConfig raw;
  KeyValues* current = &raw.top;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParameterError("config line " + std::to_string(line_no) + ": malformed section");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name == "fine") {
        raw.fine.emplace();
        current = &*raw.fine;
      } else if (name == "coarse") {
        raw.coarse.emplace();
        current = &*raw.coarse;
      } else if (name == "approx") {
        raw.approx.emplace();
        current = &*raw.approx;
      } else if (name == "method") {
        raw.methods.emplace_back();
        current = &raw.methods.back();
      } else {
        throw ParameterError("config line " + std::to_string(line_no) + ": unknown section [" +
                             name + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
    (*current)[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return raw;
}

std::string json_scalar_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
    return buf;
  }
  throw ParameterError("config: unsupported JSON value " + v.dump());
}

KeyValues json_object_to_kv(const nlohmann::json& obj, const std::string& where) {
  if (!obj.is_object()) throw ParameterError("config: " + where + " must be an object");
  KeyValues kv;
  for (const auto& [key, value] : obj.items()) kv[key] = json_scalar_to_string(value);
  return kv;
}

RawConfig parse_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParameterError("config: top level must be a JSON object");
  RawConfig raw;
  for (const auto& [key, value] : j.items()) {
    if (key == "fine") {
      raw.fine = json_object_to_kv(value, "fine");
    } else if (key == "coarse") {
      raw.coarse = json_object_to_kv(value, "coarse");
    } else if (key == "approx") {
      raw.approx = json_object_to_kv(value, "approx");
    } else if (key == "methods") {
      if (!value.is_array()) throw ParameterError("config: methods must be an array");
      for (const auto& entry : value) raw.methods.push_back(json_object_to_kv(entry, "method"));
    } else if (key == "outputs") {
      if (value.is_array()) {
        std::string joined;
        for (const auto& entry : value) {
          if (!joined.empty()) joined += ",";
          joined += json_scalar_to_string(entry);
        }
        raw.top["outputs"] = joined;
      } else {
        raw.top["outputs"] = json_scalar_to_string(value);
      }
    } else {
      raw.top[key] = json_scalar_to_string(value);
    }
  }
  return raw;
}

// Collects every offending field instead of stopping at the first.
class ConfigBuilder {
public:
  ExperimentConfig build(const RawConfig& raw) {
    ExperimentConfig cfg;
    read_top(raw.top, cfg);
    if (raw.fine)
      cfg.fine = read_level(*raw.fine, "fine", std::nullopt);
    else
      error("fine", "missing [fine] integrator section");
    if (raw.coarse) cfg.coarse = read_level(*raw.coarse, "coarse", cfg.fine);
    cfg.approx = read_approx(raw.approx);
    read_methods(raw.methods, cfg);
    cross_checks(cfg);
    if (!errors_.empty()) {
      std::string msg = "config validation failed:";
      for (const auto& e : errors_) msg += "\n  - " + e;
      throw ParameterError(msg);
    }
    return cfg;
  }

private:
  std::vector<std::string> errors_;

  void error(const std::string& field, const std::string& msg) {
    errors_.push_back(field + ": " + msg);
  }

  static bool known_key(const KeyValues& kv, const std::string& key) { return kv.count(key) > 0; }

  void check_unknown(const KeyValues& kv, const std::vector<std::string>& allowed,
                     const std::string& section) {
    for (const auto& [key, value] : kv) {
      (void)value;
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        error(section.empty() ? key : section + "." + key, "unknown key");
    }
  }

  template <typename F>
  void with_field(const KeyValues& kv, const std::string& key, const std::string& section, F f) {
    const auto it = kv.find(key);
    if (it == kv.end()) return;
    try {
      f(it->second);
    } catch (const std::exception& e) {
      error(section.empty() ? key : section + "." + key, e.what());
    }
  }

  void read_top(const KeyValues& kv, ExperimentConfig& cfg) {
    check_unknown(kv, {"lambda", "t_end", "u0", "n_blocks", "iterations", "seed", "outputs"}, "");
    with_field(kv, "lambda", "", [&](const std::string& v) { cfg.lambda = parse_complex(v); });
    with_field(kv, "u0", "", [&](const std::string& v) { cfg.u0 = parse_complex(v); });
    with_field(kv, "t_end", "", [&](const std::string& v) {
      cfg.t_end = std::stod(v);
      if (!(cfg.t_end > 0.0)) throw ParameterError("must be positive");
    });
    with_field(kv, "n_blocks", "", [&](const std::string& v) {
      cfg.num_blocks = std::stoi(v);
      if (cfg.num_blocks < 1) throw ParameterError("must be >= 1");
    });
    with_field(kv, "iterations", "", [&](const std::string& v) {
      cfg.iterations = std::stoi(v);
      if (cfg.iterations < 0) throw ParameterError("must be >= 0");
    });
    with_field(kv, "seed", "", [&](const std::string& v) { cfg.seed = std::stoull(v); });
    with_field(kv, "outputs", "", [&](const std::string& v) {
      OutputSelection sel;
      sel.volume_error = sel.interface_error = sel.gfm_bound = sel.interface_estimate =
          sel.gander_hairer = sel.linear_bound = sel.diagnostics = false;
      for (const auto& name : split_list(v)) {
        if (name == "volume_error") sel.volume_error = true;
        else if (name == "interface_error") sel.interface_error = true;
        else if (name == "gfm_bound") sel.gfm_bound = true;
        else if (name == "interface_estimate") sel.interface_estimate = true;
        else if (name == "gander_hairer") sel.gander_hairer = true;
        else if (name == "linear_bound") sel.linear_bound = true;
        else if (name == "diagnostics") sel.diagnostics = true;
        else throw ParameterError("unknown output '" + name + "'");
      }
      cfg.outputs = sel;
    });
    if (!known_key(kv, "lambda")) error("lambda", "missing");
    if (!known_key(kv, "t_end")) error("t_end", "missing");
    if (!known_key(kv, "n_blocks")) error("n_blocks", "missing");
  }

  LevelConfig read_level(const KeyValues& kv, const std::string& section,
                         const std::optional<LevelConfig>& fine) {
    LevelConfig level;
    const bool is_coarse = fine.has_value();
    check_unknown(kv,
                  {"kind", "node_family", "nodes", "rk_method", "steps", "formulation",
                   "include_left"},
                  section);

    std::string kind = is_coarse && !known_key(kv, "kind")
                           ? (fine->kind == IntegratorSpec::Kind::Collocation ? "collocation" : "rk")
                           : "";
    with_field(kv, "kind", section, [&](const std::string& v) { kind = v; });
    if (kind == "collocation") {
      level.kind = IntegratorSpec::Kind::Collocation;
    } else if (kind == "rk") {
      level.kind = IntegratorSpec::Kind::RungeKutta;
    } else {
      error(section + ".kind", kind.empty() ? "missing (collocation or rk)"
                                            : "unknown kind '" + kind + "'");
      return level;
    }

    if (is_coarse && level.kind != fine->kind) {
      error(section + ".kind", "coarse level must use the fine integrator kind");
      return level;
    }

    if (level.kind == IntegratorSpec::Kind::Collocation) {
      with_field(kv, "node_family", section,
                 [&](const std::string& v) { level.family = node_family_from_string(v); });
      if (known_key(kv, "steps")) error(section + ".steps", "collocation uses 'nodes'");
      if (known_key(kv, "include_left"))
        error(section + ".include_left", "only applies to Runge-Kutta volume blocks");
      bool have_nodes = false;
      with_field(kv, "nodes", section, [&](const std::string& v) {
        level.num_nodes = std::stoi(v);
        have_nodes = true;
        if (level.num_nodes < 1) throw ParameterError("must be >= 1");
        if (level.family == NodeFamily::LobattoLegendre && level.num_nodes < 2)
          throw ParameterError("Lobatto-Legendre requires at least 2 nodes");
      });
      if (!have_nodes && !known_key(kv, "nodes")) error(section + ".nodes", "missing");
    } else {
      if (is_coarse) {
        level.rk = fine->rk;
        level.formulation = fine->formulation;
        level.include_left = fine->include_left;
      }
      if (is_coarse && known_key(kv, "rk_method"))
        error(section + ".rk_method", "coarse level uses the fine Runge-Kutta method");
      else if (!is_coarse && !known_key(kv, "rk_method"))
        error(section + ".rk_method", "missing");
      with_field(kv, "rk_method", section,
                 [&](const std::string& v) { level.rk = RKMethod::from_name(v); });
      with_field(kv, "formulation", section, [&](const std::string& v) {
        if (v == "volume") level.formulation = RKFormulation::Volume;
        else if (v == "interface") level.formulation = RKFormulation::Interface;
        else throw ParameterError("must be volume or interface");
      });
      with_field(kv, "include_left", section, [&](const std::string& v) {
        if (v == "true" || v == "1") level.include_left = true;
        else if (v == "false" || v == "0") level.include_left = false;
        else throw ParameterError("must be true or false");
      });
      if (level.include_left && level.formulation == RKFormulation::Interface)
        error(section + ".include_left", "only applies to Runge-Kutta volume blocks");
      bool have_steps = false;
      with_field(kv, "steps", section, [&](const std::string& v) {
        level.num_nodes = std::stoi(v);
        have_steps = true;
        if (level.num_nodes < 1) throw ParameterError("must be >= 1");
      });
      if (!have_steps && !known_key(kv, "steps")) error(section + ".steps", "missing");
    }
    return level;
  }

  ApproxSpec read_approx(const std::optional<KeyValues>& section) {
    ApproxSpec approx;  // defaults to backward Euler steps between nodes
    if (!section) return approx;
    const auto& kv = *section;
    check_unknown(kv, {"kind", "rk_method", "steps"}, "approx");
    std::string kind = "qdelta_be";
    with_field(kv, "kind", "approx", [&](const std::string& v) { kind = v; });
    if (kind == "qdelta_be") {
      approx.kind = ApproxSpec::Kind::QDeltaBackwardEuler;
    } else if (kind == "rk") {
      approx.kind = ApproxSpec::Kind::RungeKutta;
      if (!known_key(kv, "rk_method")) error("approx.rk_method", "missing");
      with_field(kv, "rk_method", "approx",
                 [&](const std::string& v) { approx.rk = RKMethod::from_name(v); });
      with_field(kv, "steps", "approx", [&](const std::string& v) {
        approx.steps = std::stoi(v);
        if (approx.steps < 1) throw ParameterError("must be >= 1");
      });
    } else if (kind == "none") {
      approx.kind = ApproxSpec::Kind::None;
    } else {
      error("approx.kind", "unknown kind '" + kind + "'");
    }
    return approx;
  }

  void read_methods(const std::vector<KeyValues>& sections, ExperimentConfig& cfg) {
    if (sections.empty()) {
      error("methods", "at least one [method] section is required");
      return;
    }
    int index = 0;
    for (const auto& kv : sections) {
      const std::string section = "method[" + std::to_string(index++) + "]";
      check_unknown(kv, {"name", "omega", "variant", "label"}, section);
      std::string name, variant = "classic", label;
      double omega = 1.0;
      if (!known_key(kv, "name")) {
        error(section + ".name", "missing");
        continue;
      }
      with_field(kv, "name", section, [&](const std::string& v) { name = v; });
      with_field(kv, "omega", section, [&](const std::string& v) { omega = std::stod(v); });
      with_field(kv, "variant", section, [&](const std::string& v) { variant = v; });
      with_field(kv, "label", section, [&](const std::string& v) { label = v; });
      try {
        MethodSpec spec = MethodSpec::parse(name, omega, variant);
        if (!label.empty()) spec.label = label;
        if ((spec.name == MethodSpec::Name::DampedBlockJacobi ||
             spec.name == MethodSpec::Name::TwoLevelMultigrid) &&
            !(omega > 0.0 && omega <= 2.0))
          error(section + ".omega", "must be in (0, 2]");
        cfg.methods.push_back(std::move(spec));
      } catch (const std::exception& e) {
        error(section, e.what());
      }
    }
  }

  void cross_checks(const ExperimentConfig& cfg) {
    if (cfg.coarse && cfg.coarse->num_nodes > cfg.fine.num_nodes)
      error("coarse.nodes", "coarse level must not exceed the fine node count");
    for (const auto& m : cfg.methods) {
      if (m.needs_coarse_level() && !cfg.coarse)
        error("method " + m.display_label(), "requires a [coarse] section");
    }
  }
};

const char* kCsvHeader =
    "method,n,k,err_volume,err_interface,gfm_bound,interface_estimate,gander_hairer_bound,"
    "linear_bound";

std::uint64_t effective_seed(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("PINT_GFM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ParameterError("PINT_GFM_SEED: not an unsigned integer: " + std::string(env));
    }
  }
  return cfg.seed;
}

double sequential_max_error(const ComplexMatrix& propagator, const RealVector& nodes, Complex u0,
                            Complex lambda, double dt, int num_blocks) {
  const int m = static_cast<int>(propagator.rows());
  ComplexVector v = ComplexVector::Constant(m, u0);
  double worst = 0.0;
  for (int n = 1; n <= num_blocks; ++n) {
    v = propagator * v;
    for (int j = 0; j < m; ++j) {
      const Complex exact = u0 * std::exp(lambda * (dt * (n - 1) + dt * nodes[j]));
      worst = std::max(worst, std::abs(v[j] - exact));
    }
  }
  return worst;
}

struct SvgSeries {
  std::string label;
  std::vector<double> values;  // indexed by k
};

void render_svg(const std::vector<SvgSeries>& series, int max_k, std::ostream& out) {
  const double width = 760, height = 480;
  const double left = 70, right = 170, top = 30, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const double floor_val = 1e-16;

  double lo = 1e300, hi = -1e300;
  for (const auto& s : series)
    for (double v : s.values) {
      const double c = std::log10(std::max(v, floor_val));
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  if (lo > hi) {
    lo = -1;
    hi = 1;
  }
  lo = std::floor(lo) - 0.2;
  hi = std::ceil(hi) + 0.2;

  auto x_of = [&](double k) { return left + plot_w * (max_k > 0 ? k / max_k : 0.5); };
  auto y_of = [&](double v) {
    const double c = std::log10(std::max(v, floor_val));
    return top + plot_h * (1.0 - (c - lo) / (hi - lo));
  };

  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const int palette_size = 10;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int d = static_cast<int>(std::ceil(lo)); d <= static_cast<int>(std::floor(hi)); ++d) {
    const double y = y_of(std::pow(10.0, d));
    out << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + plot_w << "\" y2=\""
        << y << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  const int x_step = std::max(1, max_k / 10);
  for (int k = 0; k <= max_k; k += x_step) {
    const double x = x_of(k);
    out << "<text x=\"" << x << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << k << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">iteration k</text>\n";

  int idx = 0;
  for (const auto& s : series) {
    const char* color = palette[idx % palette_size];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.values.size(); ++k)
      out << x_of(static_cast<double>(k)) << "," << y_of(s.values[k]) << " ";
    out << "\"/>\n";
    const double ly = top + 14 + 16 * idx;
    out << "<line x1=\"" << left + plot_w + 10 << "\" y1=\"" << ly << "\" x2=\""
        << left + plot_w + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << left + plot_w + 40 << "\" y=\"" << ly + 4 << "\">" << s.label
        << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

} // namespace

BlockDiscretization LevelConfig::make_disc() const {
  if (kind == IntegratorSpec::Kind::Collocation) return generate_nodes(family, num_nodes);
  if (formulation == RKFormulation::Interface) return generate_nodes(NodeFamily::Equidistant, 1);
  if (include_left)
    return generate_nodes(NodeFamily::EquidistantLeftInclusive, num_nodes + 1);
  return generate_nodes(NodeFamily::Equidistant, num_nodes);
}

IntegratorSpec LevelConfig::integrator() const {
  IntegratorSpec spec;
  spec.kind = kind;
  spec.rk = rk;
  spec.formulation = formulation;
  spec.steps = num_nodes;
  return spec;
}

Complex parse_complex(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ParameterError("empty complex literal");

  const auto to_double = [](const std::string& t) -> double {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw ParameterError("invalid number '" + t + "'");
    }
    if (pos != t.size()) throw ParameterError("invalid number '" + t + "'");
    return v;
  };

  const char suffix = s.back();
  if (suffix != 'i' && suffix != 'j' && suffix != 'I' && suffix != 'J')
    return Complex(to_double(s), 0.0);

  const std::string body = s.substr(0, s.size() - 1);
  int split = -1;
  for (int i = static_cast<int>(body.size()) - 1; i > 0; --i) {
    const char c = body[static_cast<std::size_t>(i)];
    if ((c == '+' || c == '-') && body[static_cast<std::size_t>(i) - 1] != 'e' &&
        body[static_cast<std::size_t>(i) - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split < 0) return Complex(0.0, to_double(body));
  return Complex(to_double(body.substr(0, static_cast<std::size_t>(split))),
                 to_double(body.substr(static_cast<std::size_t>(split))));
}

std::string format_complex(Complex z) {
  if (z.imag() == 0.0) return fmt_double(z.real());
  std::string s = fmt_double(z.real());
  s += z.imag() < 0 ? "-" : "+";
  s += fmt_double(std::abs(z.imag()));
  s += "j";
  return s;
}

ExperimentConfig parse_config(std::istream& in) {
  // Sniff the format: JSON starts with '{'.
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  const auto first = content.find_first_not_of(" \t\r\n");
  RawConfig raw;
  if (first != std::string::npos && content[first] == '{') {
    std::istringstream stream(content);
    raw = parse_json(stream);
  } else {
    std::istringstream stream(content);
    raw = parse_ini(stream);
  }
  return ConfigBuilder().build(raw);
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file: " + path);
  return parse_config(in);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  result.config = config;
  result.config.seed = effective_seed(config);

  const Complex lam_dt = config.lam_dt();
  const BlockDiscretization fine_disc = config.fine.make_disc();

  std::optional<TwoLevelSetup> setup;
  std::optional<BlockOperatorPair> fine_pair;
  std::optional<ComplexMatrix> fine_approx;
  if (config.coarse) {
    setup = build_two_level(fine_disc, config.coarse->make_disc(), lam_dt,
                            config.fine.integrator(), config.approx);
  } else {
    fine_pair = build_pair(fine_disc, lam_dt, config.fine.integrator());
    fine_approx = build_approx(fine_disc, lam_dt, config.approx);
  }

  const InitialGuess init{InitialGuess::Kind::Random, result.config.seed};
  const int n = config.num_blocks;
  const int k = config.iterations;

  for (const auto& method : config.methods) {
    PrimaryBlockIteration it = setup ? build_iteration(method, *setup)
                                     : build_iteration(method, *fine_pair, fine_approx);
    MethodResult r;
    r.method = method.display_label();
    r.run = run_iteration(it, config.u0, n, k, init);
    r.coefficients = extract_coefficients(it, r.run);
    r.interface_coefficients = extract_interface_coefficients(it, r.run);
    r.gfm_bound = bound_table(it, r.run, n, k, BoundMode::Volume).values;
    const BoundTable iface = bound_table(it, r.run, n, k, BoundMode::Interface);
    r.interface_estimate = iface.values;
    r.interface_is_estimate = iface.is_estimate;
    r.gander_hairer = bound_table(it, r.run, n, k, BoundMode::GanderHairer).values;
    r.linear_bound = bound_table(it, r.run, n, k, BoundMode::Linear).values;
    const MatrixDiagnostics diag = matrix_diagnostics(global_iteration_matrix(it, n));
    r.inf_norm_iteration_matrix = diag.inf_norm;
    r.spectral_radius_iteration_matrix = diag.spectral_radius_estimate;
    r.consistency_residual = check_consistency(it);
    result.methods.push_back(std::move(r));
  }
  return result;
}

void write_csv(const ExperimentResult& result, std::ostream& out) {
  const auto& sel = result.config.outputs;
  out << kCsvHeader << "\n";
  for (const auto& m : result.methods) {
    const int n_blocks = m.run.num_blocks();
    const int n_iters = m.run.num_iterations();
    for (int n = 1; n <= n_blocks; ++n) {
      for (int k = 0; k <= n_iters; ++k) {
        out << m.method << "," << n << "," << k << ",";
        if (sel.volume_error) out << fmt_double(m.run.volume_errors(n, k));
        out << ",";
        if (sel.interface_error) out << fmt_double(m.run.interface_errors(n, k));
        out << ",";
        if (sel.gfm_bound) out << fmt_double(m.gfm_bound(n, k));
        out << ",";
        if (sel.interface_estimate) out << fmt_double(m.interface_estimate(n, k));
        out << ",";
        if (sel.gander_hairer) out << fmt_double(m.gander_hairer(n, k));
        out << ",";
        if (sel.linear_bound) out << fmt_double(m.linear_bound(n, k));
        out << "\n";
      }
    }
  }
}

void write_diagnostics_csv(const ExperimentResult& result, std::ostream& out) {
  out << "method,lambda,alpha,beta,gamma,delta,alpha_bar,beta_bar,gamma_bar,"
         "inf_norm_R,spectral_radius_R,consistency_residual\n";
  for (const auto& m : result.methods) {
    out << m.method << "," << format_complex(result.config.lambda) << ","
        << fmt_double(m.coefficients.alpha) << "," << fmt_double(m.coefficients.beta) << ","
        << fmt_double(m.coefficients.gamma) << "," << fmt_double(m.coefficients.delta) << ","
        << fmt_double(m.interface_coefficients.alpha_bar) << ","
        << fmt_double(m.interface_coefficients.beta_bar) << ","
        << fmt_double(m.interface_coefficients.gamma_bar) << ","
        << fmt_double(m.inf_norm_iteration_matrix) << ","
        << fmt_double(m.spectral_radius_iteration_matrix) << ","
        << fmt_double(m.consistency_residual) << "\n";
  }
}

void write_svg(const ExperimentResult& result, std::ostream& out) {
  const auto& sel = result.config.outputs;
  std::vector<SvgSeries> series;
  const int last = result.config.num_blocks;
  auto column = [&](const RealMatrix& table) {
    std::vector<double> vals;
    for (int k = 0; k < table.cols(); ++k) vals.push_back(table(last, k));
    return vals;
  };

  if (result.methods.size() == 1) {
    const auto& m = result.methods.front();
    if (sel.volume_error) series.push_back({"error (volume)", column(m.run.volume_errors)});
    if (sel.interface_error)
      series.push_back({"error (interface)", column(m.run.interface_errors)});
    if (sel.gfm_bound) series.push_back({"GFM bound", column(m.gfm_bound)});
    if (sel.interface_estimate)
      series.push_back({m.interface_is_estimate ? "interface estimate" : "interface bound",
                        column(m.interface_estimate)});
    if (sel.gander_hairer) series.push_back({"Gander-Hairer bound", column(m.gander_hairer)});
    if (sel.linear_bound) series.push_back({"linear bound", column(m.linear_bound)});
  } else {
    for (const auto& m : result.methods)
      series.push_back({m.method, column(m.run.volume_errors)});
  }
  render_svg(series, result.config.iterations, out);
}

std::vector<PropagatorAccuracy> propagator_errors(const TwoLevelSetup& setup, Complex u0,
                                                  Complex lambda, double dt, int num_blocks) {
  const RealVector& fine_nodes = setup.fine.disc().nodes;
  const RealVector& coarse_nodes = setup.coarse.disc().nodes;
  const ComplexMatrix approx =
      solve_lu(setup.fine_approx, setup.fine.chi(), "propagator_errors phi~");
  const ComplexMatrix coarse_approx =
      solve_lu(setup.coarse_approx, setup.coarse.chi(), "propagator_errors phi~_C");
  return {
      {"fine", sequential_max_error(setup.fine.propagator(), fine_nodes, u0, lambda, dt,
                                    num_blocks)},
      {"approx", sequential_max_error(approx, fine_nodes, u0, lambda, dt, num_blocks)},
      {"coarse_interp", sequential_max_error(setup.coarse.propagator(), coarse_nodes, u0, lambda,
                                             dt, num_blocks)},
      {"coarse_approx", sequential_max_error(coarse_approx, coarse_nodes, u0, lambda, dt,
                                             num_blocks)},
  };
}

std::vector<PropagatorAccuracy> propagator_errors(const BlockOperatorPair& fine,
                                                  const ComplexMatrix& phi_approx, Complex u0,
                                                  Complex lambda, double dt, int num_blocks) {
  const RealVector& nodes = fine.disc().nodes;
  const ComplexMatrix approx = solve_lu(phi_approx, fine.chi(), "propagator_errors phi~");
  return {
      {"fine", sequential_max_error(fine.propagator(), nodes, u0, lambda, dt, num_blocks)},
      {"approx", sequential_max_error(approx, nodes, u0, lambda, dt, num_blocks)},
  };
}

ExperimentConfig builtin_config(const std::string& name) {
  const double two_pi = 2.0 * M_PI;
  ExperimentConfig cfg;
  cfg.u0 = Complex(1.0, 0.0);
  cfg.num_blocks = 10;
  cfg.t_end = two_pi;
  cfg.seed = 20230417;

  auto parareal_interface = [&](Complex lambda) {
    cfg.lambda = lambda;
    cfg.iterations = 10;
    cfg.fine.kind = IntegratorSpec::Kind::RungeKutta;
    cfg.fine.rk = RKMethod::classic_rk4();
    cfg.fine.formulation = RKFormulation::Interface;
    cfg.fine.num_nodes = 10;
    cfg.approx.kind = ApproxSpec::Kind::RungeKutta;
    cfg.approx.rk = RKMethod::backward_euler();
    cfg.approx.steps = 2;
    cfg.methods = {MethodSpec::parse("parareal")};
  };

  auto seven_methods = [] {
    std::vector<MethodSpec> methods;
    methods.push_back(MethodSpec::parse("damped_block_jacobi", 1.0));
    methods.push_back(MethodSpec::parse("abj"));
    methods.push_back(MethodSpec::parse("abgs"));
    methods.push_back(MethodSpec::parse("parareal"));
    methods.push_back(MethodSpec::parse("tmg", 1.0));
    methods.push_back(MethodSpec::parse("tmg_f"));
    methods.push_back(MethodSpec::parse("pfasst"));
    return methods;
  };

  if (name == "fig2_left") {
    parareal_interface(Complex(0.0, 1.0));
  } else if (name == "fig2_right") {
    parareal_interface(Complex(-1.0, 0.0));
  } else if (name == "fig3_left") {
    parareal_interface(Complex(0.0, 4.0));
  } else if (name == "fig3_right") {
    parareal_interface(Complex(-4.0, 0.0));
  } else if (name == "fig4") {
    cfg.lambda = Complex(0.0, 1.0);
    cfg.t_end = M_PI;
    cfg.iterations = 15;
    cfg.fine.kind = IntegratorSpec::Kind::Collocation;
    cfg.fine.family = NodeFamily::LobattoLegendre;
    cfg.fine.num_nodes = 10;
    cfg.approx.kind = ApproxSpec::Kind::QDeltaBackwardEuler;
    cfg.methods = {MethodSpec::parse("bj_sdc"), MethodSpec::parse("bgs_sdc")};
  } else if (name == "fig5") {
    cfg.lambda = Complex(0.0, 1.0);
    cfg.iterations = 15;
    cfg.fine.kind = IntegratorSpec::Kind::Collocation;
    cfg.fine.family = NodeFamily::LobattoLegendre;
    cfg.fine.num_nodes = 6;
    cfg.coarse = cfg.fine;
    cfg.coarse->num_nodes = 2;
    cfg.approx.kind = ApproxSpec::Kind::QDeltaBackwardEuler;
    cfg.methods = {MethodSpec::parse("pfasst")};
  } else if (name == "fig6_left") {
    cfg.lambda = Complex(-0.2, 2.0);
    cfg.iterations = 15;
    cfg.fine.kind = IntegratorSpec::Kind::Collocation;
    cfg.fine.family = NodeFamily::LobattoLegendre;
    cfg.fine.num_nodes = 5;
    cfg.coarse = cfg.fine;
    cfg.coarse->num_nodes = 3;
    cfg.approx.kind = ApproxSpec::Kind::QDeltaBackwardEuler;
    cfg.methods = seven_methods();
  } else if (name == "fig6_right") {
    // Volume blocks spanning {0, ..., 1}: five nodes (four RK4 steps) on the
    // fine level, three nodes (two steps) on the coarse level.  The nested
    // uniform grids keep the transmission operators commuting with
    // restriction, exactly as for the quadrature node families.
    cfg.lambda = Complex(-0.2, 2.0);
    cfg.iterations = 15;
    cfg.fine.kind = IntegratorSpec::Kind::RungeKutta;
    cfg.fine.rk = RKMethod::classic_rk4();
    cfg.fine.formulation = RKFormulation::Volume;
    cfg.fine.num_nodes = 4;
    cfg.fine.include_left = true;
    cfg.coarse = cfg.fine;
    cfg.coarse->num_nodes = 2;
    cfg.approx.kind = ApproxSpec::Kind::RungeKutta;
    cfg.approx.rk = RKMethod::heun_rk2();
    cfg.methods = seven_methods();
  } else {
    throw ParameterError("unknown built-in experiment: " + name);
  }
  return cfg;
}

std::vector<std::string> reproduce(const std::string& target, const std::string& out_dir,
                                   bool svg) {
  namespace fs = std::filesystem;
  std::vector<std::string> experiment_names;
  if (target == "fig2") experiment_names = {"fig2_left", "fig2_right"};
  else if (target == "fig3") experiment_names = {"fig3_left", "fig3_right"};
  else if (target == "fig4") experiment_names = {"fig4"};
  else if (target == "fig5") experiment_names = {"fig5"};
  else if (target == "fig6") experiment_names = {"fig6_left", "fig6_right"};
  else if (target != "table3")
    throw ParameterError("unknown reproduce target: " + target +
                         " (expected fig2, fig3, fig4, fig5, fig6 or table3)");

  fs::create_directories(out_dir);
  std::vector<std::string> written;

  auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = (fs::path(out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot write " + path);
    out << content;
    written.push_back(path);
  };

  if (target == "table3") {
    std::ostringstream csv;
    csv << "family,propagator,max_abs_interface_error\n";
    for (const std::string family : {"fig6_left", "fig6_right"}) {
      const ExperimentConfig cfg = builtin_config(family);
      const TwoLevelSetup setup =
          build_two_level(cfg.fine.make_disc(), cfg.coarse->make_disc(), cfg.lam_dt(),
                          cfg.fine.integrator(), cfg.approx);
      for (const auto& row : propagator_errors(setup, cfg.u0, cfg.lambda, cfg.dt(),
                                               cfg.num_blocks))
        csv << family << "," << row.propagator << "," << fmt_double(row.max_interface_error)
            << "\n";
    }
    emit("table3.csv", csv.str());
    return written;
  }

  for (const auto& name : experiment_names) {
    const ExperimentResult result = run_experiment(builtin_config(name));
    std::ostringstream data;
    write_csv(result, data);
    emit(name + ".csv", data.str());
    if (result.config.outputs.diagnostics) {
      std::ostringstream diag;
      write_diagnostics_csv(result, diag);
      emit(name + "_diagnostics.csv", diag.str());
    }
    if (svg) {
      std::ostringstream plot;
      write_svg(result, plot);
      emit(name + ".svg", plot.str());
    }
  }
  return written;
}

} // namespace pintgfm
