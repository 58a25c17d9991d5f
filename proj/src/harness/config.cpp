#include "ricci_lab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ricci_lab/curvature.hpp"
#include "ricci_lab/errors.hpp"
#include "ricci_lab/families.hpp"
#include "ricci_lab/snapshot.hpp"

namespace rlab {
namespace {

namespace pt = boost::property_tree;

const std::vector<std::pair<std::string, std::vector<std::string>>>& layout() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> keys = {
      {"geometry", {"chart", "n", "N0", "Nt", "L"}},
      {"initial", {"family", "profile", "a", "b", "amplitude", "file"}},
      {"boundary", {"eta", "eta_a", "eta_b", "gamma", "gamma_rate"}},
      {"background", {"kind"}},
      {"run",
       {"horizon", "safety", "cadence_every", "cadence_levels", "max_steps", "stop_on_blowup",
        "rm_threshold", "rng_seed"}},
      {"tolerances", {"newton_tol", "newton_max_iter"}},
      {"output", {"dir"}},
  };
  return keys;
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::vector<std::string>& violations)
      : tree_(tree), violations_(violations) {}

  void text(const char* section, const char* key, std::string& out) {
    if (auto v = tree_.get_optional<std::string>(path(section, key))) out = *v;
  }
  template <class T>
  void number(const char* section, const char* key, T& out) {
    auto v = tree_.get_optional<std::string>(path(section, key));
    if (!v) return;
    if (!parse_number(*v, out))
      violations_.push_back(std::string(section) + "." + key + ": not a number: '" + *v + "'");
  }
  void flag(const char* section, const char* key, bool& out) {
    auto v = tree_.get_optional<std::string>(path(section, key));
    if (!v) return;
    if (*v == "true") out = true;
    else if (*v == "false") out = false;
    else violations_.push_back(std::string(section) + "." + key + ": expected true or false");
  }

 private:
  static pt::ptree::path_type path(const char* section, const char* key) {
    return pt::ptree::path_type(std::string(section) + "/" + key, '/');
  }
  const pt::ptree& tree_;
  std::vector<std::string>& violations_;
};

double warp_value(const RunConfig& c, double x) {
  if (c.profile == "linear") return 1.0 + c.a * x;
  if (c.profile == "quadratic") return 1.0 + c.a * x + c.b * x * x;
  return 1.0 + c.a * std::sin(std::numbers::pi * x);
}

std::string section_of(const std::string& key) {
  for (const auto& [section, keys] : layout())
    for (const auto& k : keys)
      if (k == key) return section;
  return {};
}

}  // namespace

std::string shortest(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> v;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) v.push_back(msg);
  };
  need(c.chart == "slab" || c.chart == "ball", "geometry.chart: expected slab or ball");
  need(c.n >= 1 && c.n <= 6, "geometry.n: must be in 1..6");
  need(c.N0 >= 4, "geometry.N0: must be >= 4");
  if (!c.is_ball()) need(c.Nt >= 4, "geometry.Nt: must be >= 4");
  need(c.L > 0.0, "geometry.L: must be > 0");

  static const std::set<std::string> slab_families = {"flat", "warped", "conformal", "random",
                                                       "file"};
  static const std::set<std::string> ball_families = {"flat", "hemisphere", "file"};
  if (c.is_ball())
    need(ball_families.count(c.family) == 1,
         "initial.family: '" + c.family + "' is not a ball family (flat, hemisphere, file)");
  else
    need(slab_families.count(c.family) == 1,
         "initial.family: '" + c.family +
             "' is not a slab family (flat, warped, conformal, random, file)");
  need(c.profile == "linear" || c.profile == "quadratic" || c.profile == "sine",
       "initial.profile: expected linear, quadratic or sine");
  if (c.family == "warped" && !c.is_ball()) {
    bool positive = true;
    for (int k = 0; k <= 64; ++k) positive = positive && warp_value(c, k / 64.0) > 0.0;
    need(positive, "initial: warped profile must stay positive on [0, 1]");
  }
  if (c.family == "random" || c.family == "conformal")
    need(c.amplitude >= 0.0, "initial.amplitude: must be >= 0");
  if (c.family == "file") need(!c.file.empty(), "initial.file: required for family = file");

  need(c.eta == "from_initial" || c.eta == "constant" || c.eta == "linear" ||
           c.eta == "induced_power",
       "boundary.eta: expected from_initial, constant, linear or induced_power");
  need(c.gamma == "from_initial" || c.gamma == "scaled",
       "boundary.gamma: expected from_initial or scaled");
  need(c.background == "frozen", "background.kind: only frozen is supported");

  need(c.horizon > 0.0 && std::isfinite(c.horizon), "run.horizon: must be > 0");
  need(c.safety > 0.0 && c.safety <= 1.0, "run.safety: must be in (0, 1]");
  need(c.cadence_every >= 0, "run.cadence_every: must be >= 0");
  need(c.cadence_levels >= 0 && c.cadence_levels <= 40, "run.cadence_levels: must be in 0..40");
  need(c.max_steps > 0, "run.max_steps: must be > 0");
  need(c.rm_threshold >= 0.0, "run.rm_threshold: must be >= 0");
  need(c.newton_tol > 0.0, "tolerances.newton_tol: must be > 0");
  need(c.newton_max_iter >= 1, "tolerances.newton_max_iter: must be >= 1");
  need(!c.output_dir.empty(), "output.dir: must not be empty");
  return v;
}

ConfigParse parse_config(const std::string& text) {
  ConfigParse out;
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    out.violations.push_back(std::string("syntax: ") + e.what());
    return out;
  }
  for (const auto& [section, body] : tree) {
    bool known_section = false;
    for (const auto& [name, keys] : layout()) {
      if (name != section) continue;
      known_section = true;
      for (const auto& [key, value] : body) {
        (void)value;
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
          out.violations.push_back("unknown key " + section + "." + key);
      }
    }
    if (!known_section) {
      if (!body.data().empty())
        out.violations.push_back("key outside any section: " + section +
                                 (section_of(section).empty() ? "" : " (belongs in [" +
                                                                         section_of(section) + "])"));
      else
        out.violations.push_back("unknown section [" + section + "]");
    }
  }

  RunConfig& c = out.config;
  Reader r(tree, out.violations);
  r.text("geometry", "chart", c.chart);
  r.number("geometry", "n", c.n);
  r.number("geometry", "N0", c.N0);
  r.number("geometry", "Nt", c.Nt);
  r.number("geometry", "L", c.L);
  r.text("initial", "family", c.family);
  r.text("initial", "profile", c.profile);
  r.number("initial", "a", c.a);
  r.number("initial", "b", c.b);
  r.number("initial", "amplitude", c.amplitude);
  r.text("initial", "file", c.file);
  r.text("boundary", "eta", c.eta);
  r.number("boundary", "eta_a", c.eta_a);
  r.number("boundary", "eta_b", c.eta_b);
  r.text("boundary", "gamma", c.gamma);
  r.number("boundary", "gamma_rate", c.gamma_rate);
  r.text("background", "kind", c.background);
  r.number("run", "horizon", c.horizon);
  r.number("run", "safety", c.safety);
  r.number("run", "cadence_every", c.cadence_every);
  r.number("run", "cadence_levels", c.cadence_levels);
  r.number("run", "max_steps", c.max_steps);
  r.flag("run", "stop_on_blowup", c.stop_on_blowup);
  r.number("run", "rm_threshold", c.rm_threshold);
  r.number("run", "rng_seed", c.rng_seed);
  r.number("tolerances", "newton_tol", c.newton_tol);
  r.number("tolerances", "newton_max_iter", c.newton_max_iter);
  r.text("output", "dir", c.output_dir);

  for (std::string& msg : validate(c)) out.violations.push_back(std::move(msg));
  return out;
}

ConfigParse load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  auto section = [&](const char* name) { os << (os.tellp() > 0 ? "\n[" : "[") << name << "]\n"; };
  auto kv = [&](const char* key, const std::string& value) { os << key << " = " << value << "\n"; };
  auto num = [&](const char* key, double value) { kv(key, shortest(value)); };
  auto integer = [&](const char* key, long long value) { kv(key, std::to_string(value)); };

  section("geometry");
  kv("chart", c.chart);
  integer("n", c.n);
  integer("N0", c.N0);
  integer("Nt", c.Nt);
  num("L", c.L);
  section("initial");
  kv("family", c.family);
  kv("profile", c.profile);
  num("a", c.a);
  num("b", c.b);
  num("amplitude", c.amplitude);
  kv("file", c.file);
  section("boundary");
  kv("eta", c.eta);
  num("eta_a", c.eta_a);
  num("eta_b", c.eta_b);
  kv("gamma", c.gamma);
  num("gamma_rate", c.gamma_rate);
  section("background");
  kv("kind", c.background);
  section("run");
  num("horizon", c.horizon);
  num("safety", c.safety);
  integer("cadence_every", c.cadence_every);
  integer("cadence_levels", c.cadence_levels);
  integer("max_steps", c.max_steps);
  kv("stop_on_blowup", c.stop_on_blowup ? "true" : "false");
  num("rm_threshold", c.rm_threshold);
  kv("rng_seed", std::to_string(c.rng_seed));
  section("tolerances");
  num("newton_tol", c.newton_tol);
  integer("newton_max_iter", c.newton_max_iter);
  section("output");
  kv("dir", c.output_dir);
  return os.str();
}

std::string resolve_output_dir(const RunConfig& c) {
  const std::filesystem::path dir(c.output_dir);
  const char* root = std::getenv("RLAB_OUTPUT_ROOT");
  if (root && *root && dir.is_relative()) return (std::filesystem::path(root) / dir).string();
  return dir.string();
}

// ------------------------------------------------------------- builders

Chart build_chart(const RunConfig& c) {
  return c.is_ball() ? Chart::radial_ball(c.n, c.N0) : Chart::slab_torus(c.n, c.N0, c.Nt, c.L);
}

MetricField build_initial_metric(const RunConfig& c) {
  if (c.is_ball()) throw std::invalid_argument("build_initial_metric: slab configs only");
  const Chart chart = build_chart(c);
  if (c.family == "flat") return MetricField::identity(chart);
  if (c.family == "warped") return warped_slab(chart, [&](double x) { return warp_value(c, x); });
  if (c.family == "conformal") return conformal_exp(chart, c.amplitude);
  if (c.family == "random") return random_smooth_metric(chart, c.rng_seed, c.amplitude);
  if (c.family == "file") {
    Snapshot s = read_snapshot(c.file, c.L);
    if (s.field.chart().N0() != c.N0 || s.field.chart().Nt() != c.Nt || s.field.chart().n() != c.n)
      throw DataError("initial.file " + c.file + " does not match the configured geometry");
    return MetricField(std::move(s.field));
  }
  throw DataError("unknown initial family " + c.family);
}

namespace {

EtaRule eta_rule(const RunConfig& c) {
  if (c.eta == "constant") return EtaRule::time(TimeFunction::constant(c.eta_a));
  if (c.eta == "linear") return EtaRule::time(TimeFunction::linear(c.eta_a, c.eta_b));
  if (c.eta == "induced_power") return EtaRule::induced_power(c.eta_a, c.eta_b);
  throw DataError("unknown eta rule " + c.eta);
}

}  // namespace

BoundaryDatum build_datum(const RunConfig& c, const MetricField& g0) {
  BoundaryDatum d = BoundaryDatum::from_initial(g0);
  for (auto& [side, sd] : d.sides) {
    if (c.eta != "from_initial") sd.eta = eta_rule(c);
    if (c.gamma == "scaled")
      sd.gamma = GammaRule::scaled(induced_metric(g0, side), TimeFunction::linear(1.0, c.gamma_rate));
  }
  return d;
}

BackgroundFamily build_background(const RunConfig& c, const MetricField& g0) {
  if (c.background != "frozen") throw DataError("unknown background kind " + c.background);
  return BackgroundFamily::frozen(g0);
}

namespace {

NewtonOptions newton_options(const RunConfig& c) {
  NewtonOptions o;
  o.tolerance = c.newton_tol;
  o.max_iterations = c.newton_max_iter;
  return o;
}

Cadence cadence(const RunConfig& c) {
  Cadence k = c.cadence_levels > 0 ? Cadence::dyadic(c.horizon, c.cadence_levels) : Cadence{};
  k.every = c.cadence_every;
  return k;
}

}  // namespace

RunOptions build_run_options(const RunConfig& c) {
  RunOptions o;
  o.horizon = c.horizon;
  o.safety = c.safety;
  o.cadence = cadence(c);
  o.stop_on_blowup = c.stop_on_blowup;
  o.max_steps = c.max_steps;
  o.newton = newton_options(c);
  return o;
}

RotState build_rot_state(const RunConfig& c) {
  if (!c.is_ball()) throw std::invalid_argument("build_rot_state: ball configs only");
  if (c.family == "flat") return flat_ball_state(c.n, c.N0);
  if (c.family == "hemisphere") return hemisphere_state(c.n, c.N0);
  if (c.family == "file") {
    Snapshot s = read_snapshot(c.file);
    if (s.field.chart().N0() != c.N0 || s.field.chart().n() != c.n)
      throw DataError("initial.file " + c.file + " does not match the configured geometry");
    RotState st = rot_state_from(MetricField(std::move(s.field)));
    return st;
  }
  throw DataError("unknown ball family " + c.family);
}

BoundaryDatum build_rot_datum(const RunConfig& c, const RotState& s0) {
  const TimeFunction lambda = c.gamma == "scaled" ? TimeFunction::linear(1.0, c.gamma_rate)
                                                  : TimeFunction::constant(1.0);
  if (c.eta != "from_initial") return rot_datum(s0, eta_rule(c), lambda);
  // H of the initial face: the residual against eta = 0.
  const BoundaryDatum zero = rot_datum(s0, EtaRule::time(TimeFunction::constant(0.0)));
  const double h0 = rot_boundary_residual(s0, zero, 0.0);
  return rot_datum(s0, EtaRule::time(TimeFunction::constant(h0)), lambda);
}

RotRunOptions build_rot_options(const RunConfig& c) {
  RotRunOptions o;
  o.horizon = c.horizon;
  o.safety = c.safety;
  o.cadence = cadence(c);
  o.stop_on_blowup = c.stop_on_blowup;
  if (c.rm_threshold > 0.0) o.rm_threshold = c.rm_threshold;
  o.max_steps = c.max_steps;
  o.newton = newton_options(c);
  return o;
}

}  // namespace rlab
