#include "rnshmc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace rnshmc {
namespace {

/// Raised by value parsers; wrapped with source/line context by the caller.
struct BadValue {
  std::string message;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end || !std::isfinite(out))
    throw BadValue{"expected a real number, got '" + v + "'"};
  return out;
}

std::uint64_t to_uint(const std::string& v) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end)
    throw BadValue{"expected a non-negative integer, got '" + v + "'"};
  return out;
}

long to_long(const std::string& v) {
  long out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end) throw BadValue{"expected an integer, got '" + v + "'"};
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw BadValue{"expected true or false, got '" + v + "'"};
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  return out;
}

double positive(double x, const char* what) {
  if (!(x > 0.0)) throw BadValue{std::string(what) + " must be > 0"};
  return x;
}

double non_negative(double x, const char* what) {
  if (!(x >= 0.0)) throw BadValue{std::string(what) + " must be >= 0"};
  return x;
}

std::size_t at_least(std::uint64_t x, std::uint64_t lo, const char* what) {
  if (x < lo) throw BadValue{std::string(what) + " must be >= " + std::to_string(lo)};
  return static_cast<std::size_t>(x);
}

std::string one_of(const std::string& v, std::initializer_list<const char*> allowed, const char* what) {
  std::string names;
  for (const char* a : allowed) {
    if (v == a) return v;
    names += names.empty() ? a : std::string(", ") + a;
  }
  throw BadValue{std::string(what) + " must be one of: " + names + " (got '" + v + "')"};
}

std::string fmt(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string fmt(bool b) { return b ? "true" : "false"; }

std::string fmt_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + fmt(xs[i]);
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

struct Field {
  const char* section;
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

const std::vector<Field>& schema() {
  using C = ExperimentConfig;
  using S = std::string;
  using O = std::optional<std::string>;
  static const std::vector<Field> fields = {
      {"", "description", [](C& c, const S& v) { c.description = v; },
       [](const C& c) -> O { return quote(c.description); }},

      {"target", "kind",
       [](C& c, const S& v) {
         c.target.kind = one_of(v, {"gaussian", "gaussian-correlated", "banana", "logistic-sim", "logistic-csv"},
                                "target.kind");
       },
       [](const C& c) -> O { return c.target.kind; }},
      {"target", "dim", [](C& c, const S& v) { c.target.dim = at_least(to_uint(v), 1, "target.dim"); },
       [](const C& c) -> O { return std::to_string(c.target.dim); }},
      {"target", "major_eigenvalue",
       [](C& c, const S& v) { c.target.majorEigenvalue = positive(to_double(v), "target.major_eigenvalue"); },
       [](const C& c) -> O { return fmt(c.target.majorEigenvalue); }},
      {"target", "minor_eigenvalue",
       [](C& c, const S& v) { c.target.minorEigenvalue = positive(to_double(v), "target.minor_eigenvalue"); },
       [](const C& c) -> O { return fmt(c.target.minorEigenvalue); }},
      {"target", "bend", [](C& c, const S& v) { c.target.bend = non_negative(to_double(v), "target.bend"); },
       [](const C& c) -> O { return fmt(c.target.bend); }},
      {"target", "scale", [](C& c, const S& v) { c.target.scale = positive(to_double(v), "target.scale"); },
       [](const C& c) -> O { return fmt(c.target.scale); }},
      {"target", "observations",
       [](C& c, const S& v) { c.target.observations = at_least(to_uint(v), 1, "target.observations"); },
       [](const C& c) -> O { return std::to_string(c.target.observations); }},
      {"target", "data_seed", [](C& c, const S& v) { c.target.dataSeed = to_uint(v); },
       [](const C& c) -> O { return std::to_string(c.target.dataSeed); }},
      {"target", "prior_variance",
       [](C& c, const S& v) { c.target.priorVariance = positive(to_double(v), "target.prior_variance"); },
       [](const C& c) -> O { return fmt(c.target.priorVariance); }},
      {"target", "path", [](C& c, const S& v) { c.target.path = v; },
       [](const C& c) -> O { return quote(c.target.path); }},
      {"target", "label", [](C& c, const S& v) { c.target.label = v; },
       [](const C& c) -> O { return quote(c.target.label); }},
      {"target", "standardize", [](C& c, const S& v) { c.target.standardize = to_bool(v); },
       [](const C& c) -> O { return fmt(c.target.standardize); }},
      {"target", "intercept", [](C& c, const S& v) { c.target.intercept = to_bool(v); },
       [](const C& c) -> O { return fmt(c.target.intercept); }},

      {"sampler", "kind",
       [](C& c, const S& v) { c.sampler.kind = one_of(v, {"hmc", "rns-hmc", "arns-hmc", "gp-hmc"}, "sampler.kind"); },
       [](const C& c) -> O { return c.sampler.kind; }},
      {"sampler", "step_size",
       [](C& c, const S& v) { c.sampler.stepSize = positive(to_double(v), "sampler.step_size"); },
       [](const C& c) -> O { return fmt(c.sampler.stepSize); }},
      {"sampler", "leapfrog_steps",
       [](C& c, const S& v) { c.sampler.leapfrogSteps = at_least(to_uint(v), 1, "sampler.leapfrog_steps"); },
       [](const C& c) -> O { return std::to_string(c.sampler.leapfrogSteps); }},
      {"sampler", "mass",
       [](C& c, const S& v) {
         c.sampler.mass = to_list(v);
         for (double m : c.sampler.mass) positive(m, "sampler.mass entries");
       },
       [](const C& c) -> O { return fmt_list(c.sampler.mass); }},
      {"sampler", "initial", [](C& c, const S& v) { c.sampler.initial = to_list(v); },
       [](const C& c) -> O { return fmt_list(c.sampler.initial); }},
      {"sampler", "jitter", [](C& c, const S& v) { c.sampler.jitter = to_bool(v); },
       [](const C& c) -> O { return fmt(c.sampler.jitter); }},
      {"sampler", "max_divergences", [](C& c, const S& v) { c.sampler.maxDivergences = to_long(v); },
       [](const C& c) -> O { return std::to_string(c.sampler.maxDivergences); }},

      {"surrogate", "hidden",
       [](C& c, const S& v) { c.surrogate.hidden = at_least(to_uint(v), 1, "surrogate.hidden"); },
       [](const C& c) -> O { return std::to_string(c.surrogate.hidden); }},
      {"surrogate", "node_kind",
       [](C& c, const S& v) { c.surrogate.nodeKind = one_of(v, {"additive", "rbf"}, "surrogate.node_kind"); },
       [](const C& c) -> O { return c.surrogate.nodeKind; }},
      {"surrogate", "ridge",
       [](C& c, const S& v) { c.surrogate.ridge = non_negative(to_double(v), "surrogate.ridge"); },
       [](const C& c) -> O { return fmt(c.surrogate.ridge); }},
      {"surrogate", "weight_scale",
       [](C& c, const S& v) { c.surrogate.weightScale = positive(to_double(v), "surrogate.weight_scale"); },
       [](const C& c) -> O { return fmt(c.surrogate.weightScale); }},
      {"surrogate", "standardize_inputs", [](C& c, const S& v) { c.surrogate.standardizeInputs = to_bool(v); },
       [](const C& c) -> O { return fmt(c.surrogate.standardizeInputs); }},
      {"surrogate", "include_rejected", [](C& c, const S& v) { c.surrogate.includeRejected = to_bool(v); },
       [](const C& c) -> O { return fmt(c.surrogate.includeRejected); }},
      {"surrogate", "gp_signal_variance", [](C& c, const S& v) { c.surrogate.gpSignalVariance = to_double(v); },
       [](const C& c) -> O { return fmt(c.surrogate.gpSignalVariance); }},
      {"surrogate", "gp_length_scale", [](C& c, const S& v) { c.surrogate.gpLengthScale = to_double(v); },
       [](const C& c) -> O { return fmt(c.surrogate.gpLengthScale); }},
      {"surrogate", "gp_noise_variance", [](C& c, const S& v) { c.surrogate.gpNoiseVariance = to_double(v); },
       [](const C& c) -> O { return fmt(c.surrogate.gpNoiseVariance); }},
      {"surrogate", "gp_max_points",
       [](C& c, const S& v) { c.surrogate.gpMaxPoints = at_least(to_uint(v), 1, "surrogate.gp_max_points"); },
       [](const C& c) -> O { return std::to_string(c.surrogate.gpMaxPoints); }},

      {"phases", "warmup", [](C& c, const S& v) { c.phases.warmup = at_least(to_uint(v), 0, "phases.warmup"); },
       [](const C& c) -> O { return std::to_string(c.phases.warmup); }},
      {"phases", "burnin", [](C& c, const S& v) { c.phases.burnin = at_least(to_uint(v), 0, "phases.burnin"); },
       [](const C& c) -> O { return std::to_string(c.phases.burnin); }},
      {"phases", "samples", [](C& c, const S& v) { c.phases.samples = at_least(to_uint(v), 10, "phases.samples"); },
       [](const C& c) -> O { return std::to_string(c.phases.samples); }},

      {"adaptation", "rule",
       [](C& c, const S& v) { c.adaptation.rule = one_of(v, {"harmonic", "none"}, "adaptation.rule"); },
       [](const C& c) -> O { return c.adaptation.rule; }},
      {"adaptation", "constant",
       [](C& c, const S& v) { c.adaptation.constant = positive(to_double(v), "adaptation.constant"); },
       [](const C& c) -> O { return fmt(c.adaptation.constant); }},
      {"adaptation", "init_batch",
       [](C& c, const S& v) { c.adaptation.initBatch = at_least(to_uint(v), 0, "adaptation.init_batch"); },
       [](const C& c) -> O { return std::to_string(c.adaptation.initBatch); }},

      {"fixture", "iterations",
       [](C& c, const S& v) { c.fixture.iterations = at_least(to_uint(v), 10, "fixture.iterations"); },
       [](const C& c) -> O { return std::to_string(c.fixture.iterations); }},
      {"fixture", "burnin", [](C& c, const S& v) { c.fixture.burnin = at_least(to_uint(v), 0, "fixture.burnin"); },
       [](const C& c) -> O { return std::to_string(c.fixture.burnin); }},

      {"run", "seed", [](C& c, const S& v) { c.seed = to_uint(v); },
       [](const C& c) -> O {
         if (!c.seed) return std::nullopt;
         return std::to_string(*c.seed);
       }},
      {"run", "output", [](C& c, const S& v) { c.output = v; }, [](const C& c) -> O { return quote(c.output); }},
      {"run", "record_timing", [](C& c, const S& v) { c.recordTiming = to_bool(v); },
       [](const C& c) -> O { return fmt(c.recordTiming); }},
  };
  return fields;
}

/// Splits the raw text after '=' into a value, honoring double quotes and
/// stripping trailing '#' comments outside them.
std::string read_value(const std::string& raw) {
  const std::string v = trim(raw);
  if (!v.empty() && v.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < v.size() && v[i] != '"'; ++i) {
      if (v[i] == '\\' && i + 1 < v.size()) ++i;
      out += v[i];
    }
    if (i >= v.size()) throw BadValue{"unterminated quoted string"};
    const std::string rest = trim(v.substr(i + 1));
    if (!rest.empty() && rest.front() != '#') throw BadValue{"unexpected text after quoted string"};
    return out;
  }
  return trim(v.substr(0, v.find('#')));
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& sourceName,
                                   const std::filesystem::path& baseDir) {
  std::map<std::string, const Field*> lookup;
  for (const auto& f : schema())
    lookup[std::string(f.section) + (f.section[0] ? "." : "") + f.key] = &f;

  ExperimentConfig cfg;
  cfg.baseDir = baseDir;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineNo = 0;
  auto fail = [&](const std::string& msg) -> ConfigError {
    return ConfigError(sourceName + ":" + std::to_string(lineNo) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw fail("malformed section header '" + t + "'");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw fail("expected 'key = value', got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = lookup.find(full);
    if (it == lookup.end()) throw fail("unknown key '" + full + "'");
    if (!seen.insert(full).second) throw fail("duplicate key '" + full + "'");
    try {
      it->second->set(cfg, read_value(t.substr(eq + 1)));
    } catch (const BadValue& e) {
      throw fail(full + ": " + e.message);
    } catch (const Error& e) {
      throw fail(full + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string(), path.parent_path());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string section = "\x01";
  for (const auto& f : schema()) {
    const auto value = f.get(cfg);
    if (!value) continue;
    if (section != f.section) {
      section = f.section;
      if (!section.empty()) out << "\n[" << section << "]\n";
    }
    out << f.key << " = " << *value << "\n";
  }
  return out.str();
}

std::filesystem::path resolve_path(const ExperimentConfig& cfg, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative() && !cfg.baseDir.empty()) return cfg.baseDir / p;
  return p;
}

void validate_config(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw ConfigError("run.seed is required (or pass --seed)");
  const auto& t = cfg.target;
  if (t.kind == "banana" && t.dim != 2) throw ConfigError("target.dim must be 2 for the banana target");
  if (t.kind == "logistic-sim" && t.dim < 2) throw ConfigError("target.dim must be >= 2 for logistic-sim");
  if (t.kind == "logistic-csv") {
    if (t.path.empty()) throw ConfigError("target.path is required for logistic-csv");
    if (!std::filesystem::exists(resolve_path(cfg, t.path)))
      throw ConfigError("target.path '" + resolve_path(cfg, t.path).string() + "' does not exist");
  }
  const std::size_t d = t.kind == "banana" ? 2 : t.dim;
  if (t.kind != "logistic-csv") {
    if (cfg.sampler.mass.size() > 1 && cfg.sampler.mass.size() != d)
      throw ConfigError("sampler.mass must have 1 or " + std::to_string(d) + " entries");
    if (!cfg.sampler.initial.empty() && cfg.sampler.initial.size() != d)
      throw ConfigError("sampler.initial must have " + std::to_string(d) + " entries");
  }
  const auto& k = cfg.sampler.kind;
  if ((k == "rns-hmc" || k == "gp-hmc") && cfg.phases.burnin <= cfg.phases.warmup)
    throw ConfigError("phases.burnin must exceed phases.warmup for " + k);
  if (cfg.surrogate.nodeKind == "rbf" && k == "arns-hmc" && cfg.adaptation.initBatch == 0)
    throw ConfigError("rbf nodes need adaptation.init_batch >= 1 to place their centers");
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(serialize_config(cfg)); }

}  // namespace rnshmc
