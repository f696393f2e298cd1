#include "nemasim/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace nemasim {
namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

const std::set<std::string> kSections = {"parameters", "solver",       "control", "initial",
                                         "frozen",     "analysis",     "verification", "output"};

class Reader {
 public:
  Reader(std::string source, std::map<std::string, Section> sections, std::map<std::string, int> headers)
      : source_(std::move(source)), sections_(std::move(sections)), headers_(std::move(headers)) {}

  bool has_section(const std::string& name) const { return sections_.count(name) != 0; }

  std::optional<double> number(const std::string& section, const std::string& key, bool required) {
    auto* e = find(section, key, required);
    if (!e) return std::nullopt;
    double v = 0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(e->line, "key '" + key + "': expected a number, got '" + e->value + "'");
    return v;
  }

  double number_or(const std::string& section, const std::string& key, double fallback) {
    return number(section, key, false).value_or(fallback);
  }

  std::optional<std::string> text(const std::string& section, const std::string& key, bool required) {
    auto* e = find(section, key, required);
    if (!e) return std::nullopt;
    return e->value;
  }

  template <typename Enum>
  std::optional<Enum> choice(const std::string& section, const std::string& key,
                             const std::map<std::string, Enum>& options, bool required) {
    auto* e = find(section, key, required);
    if (!e) return std::nullopt;
    const auto it = options.find(e->value);
    if (it == options.end()) {
      std::string allowed;
      for (const auto& [name, _] : options) allowed += (allowed.empty() ? "" : ", ") + name;
      fail(e->line, "key '" + key + "': '" + e->value + "' is not one of {" + allowed + "}");
    }
    return it->second;
  }

  std::optional<bool> flag(const std::string& section, const std::string& key) {
    return choice<bool>(section, key, {{"true", true}, {"false", false}}, false);
  }

  std::optional<long> integer(const std::string& section, const std::string& key) {
    auto* e = find(section, key, false);
    if (!e) return std::nullopt;
    long v = 0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(e->line, "key '" + key + "': expected an integer, got '" + e->value + "'");
    return v;
  }

  int line_of(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s != sections_.end()) {
      const auto k = s->second.find(key);
      if (k != s->second.end()) return k->second.line;
    }
    return 0;
  }

  void reject_unused() const {
    for (const auto& [name, section] : sections_)
      for (const auto& [key, entry] : section)
        if (!entry.used) fail(entry.line, "unknown key '" + key + "' in [" + name + "]");
  }

  [[noreturn]] void fail(int line, const std::string& message) const {
    throw ParseError(source_ + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message);
  }

 private:
  Entry* find(const std::string& section, const std::string& key, bool required) {
    auto s = sections_.find(section);
    if (s != sections_.end()) {
      auto k = s->second.find(key);
      if (k != s->second.end()) {
        k->second.used = true;
        return &k->second;
      }
    }
    if (required) {
      const auto h = headers_.find(section);
      fail(h == headers_.end() ? 0 : h->second, "missing required key '" + key + "' in [" + section + "]");
    }
    return nullptr;
  }

  std::string source_;
  std::map<std::string, Section> sections_;
  std::map<std::string, int> headers_;
};

Reader tokenize(const std::string& text, const std::string& source) {
  std::map<std::string, Section> sections;
  std::map<std::string, int> headers;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  auto fail = [&](const std::string& message) { throw ParseError(source + ":" + std::to_string(line) + ": " + message); };
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(std::string_view(raw).substr(0, hash));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') fail("unterminated section header");
      current = trim(std::string_view(content).substr(1, content.size() - 2));
      if (!kSections.count(current)) fail("unknown section [" + current + "]");
      if (headers.count(current)) fail("duplicate section [" + current + "]");
      headers[current] = line;
      sections[current];
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (current.empty()) fail("key outside of any section");
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (value.empty()) fail("key '" + key + "' has no value");
    auto& section = sections[current];
    if (const auto it = section.find(key); it != section.end())
      fail("duplicate key '" + key + "' (first set on line " + std::to_string(it->second.line) + ")");
    section[key] = Entry{value, line, false};
  }
  return Reader(source, std::move(sections), std::move(headers));
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& source) {
  Reader r = tokenize(text, source.string());
  ScenarioConfig cfg;
  cfg.source = source;

  auto& p = cfg.params;
  const std::string P = "parameters";
  const std::pair<const char*, double*> required[] = {
      {"m", &p.recruitment_m}, {"beta_max", &p.beta_max}, {"a_opt", &p.a_opt},     {"sigma_p", &p.sigma_p},
      {"d_max", &p.d_max},     {"eta", &p.eta},           {"mu_F", &p.mu_F},       {"mu_I", &p.mu_I},
      {"alpha", &p.alpha},     {"e", &p.e_reinfect},      {"gamma", &p.gamma},     {"rho", &p.rho},
      {"K", &p.K_cap},         {"K_d", &p.K_d},           {"a_max", &p.a_max},     {"theta_max", &p.theta_max},
      {"a_star", &p.a_star},   {"a_0", &p.a_0}};
  for (const auto& [key, field] : required) *field = *r.number(P, key, true);
  p.b_floor = r.number_or(P, "b", p.b_floor);
  p.infection = r.choice<InfectionModel>(P, "infection",
                                         {{"gaussian", InfectionModel::Gaussian}, {"constant", InfectionModel::Constant}},
                                         false)
                    .value_or(InfectionModel::Gaussian);
  p.mortality = r.choice<MortalityModel>(P, "mortality",
                                         {{"power-law", MortalityModel::PowerLaw}, {"constant", MortalityModel::Constant}},
                                         false)
                    .value_or(MortalityModel::PowerLaw);
  if (p.mortality == MortalityModel::PowerLaw) {
    p.mu_alpha0 = *r.number(P, "mu_alpha0", true);
    p.mu_exp = *r.number(P, "mu_exp", true);
  } else {
    p.mu_constant = *r.number(P, "mu_constant", true);
  }

  auto& s = cfg.solver;
  s.h = *r.number("solver", "h", true);
  s.T = *r.number("solver", "T", true);
  s.record_every = r.integer("solver", "record_every").value_or(1);
  s.epsilon_P = r.number_or("solver", "epsilon_P", s.epsilon_P);

  if (r.has_section("control")) {
    ControlSchedule<double> c;
    c.u_max = *r.number("control", "u_max", true);
    c.period = r.number_or("control", "period", c.period);
    c.pulse_width = r.number_or("control", "pulse_width", c.pulse_width);
    c.horizon = r.number_or("control", "horizon", s.T);
    cfg.control = c;
  }

  auto& init = cfg.initial;
  init.kind = *r.choice<InitialProfile>("initial", "profile",
                                        {{"spike-at-zero", InitialProfile::SpikeAtZero},
                                         {"steady-state", InitialProfile::SteadyState},
                                         {"file", InitialProfile::File}},
                                        true);
  init.N_F0 = *r.number("initial", "N_F0", true);
  init.N_I0 = *r.number("initial", "N_I0", true);
  if (init.kind == InitialProfile::SpikeAtZero) init.spike = r.number_or("initial", "spike", init.spike);
  if (init.kind == InitialProfile::File) {
    std::filesystem::path f = *r.text("initial", "file", true);
    init.file = f.is_relative() ? source.parent_path() / f : f;
  }

  if (r.has_section("frozen")) {
    FrozenCoefficients<double> fc;
    fc.force_scale = *r.number("frozen", "force_scale", true);
    fc.consumption_scale = *r.number("frozen", "consumption_scale", true);
    s.frozen = fc;
  }

  cfg.analysis.thresholds = r.flag("analysis", "thresholds").value_or(true);
  cfg.analysis.audit = r.flag("analysis", "audit").value_or(true);
  cfg.analysis.quadrature_intervals = r.integer("analysis", "quadrature_intervals").value_or(3000);

  cfg.verification.refinements =
      static_cast<int>(r.integer("verification", "refinements").value_or(cfg.verification.refinements));
  cfg.verification.h_coarsest = r.number_or("verification", "h_coarsest", cfg.verification.h_coarsest);

  if (auto dir = r.text("output", "dir", false)) cfg.output_dir = *dir;

  r.reject_unused();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open configuration file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

namespace {

struct ProfileTable {
  std::vector<double> a, S, I;
};

ProfileTable read_profile_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open initial profile");
  ProfileTable t;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string content = trim(std::string_view(raw).substr(0, raw.find('#')));
    if (content.empty()) continue;
    if (line == 1 && !content.empty() && std::isalpha(static_cast<unsigned char>(content.front()))) continue;
    double v[3];
    std::size_t pos = 0;
    for (int c = 0; c < 3; ++c) {
      const auto comma = content.find(',', pos);
      const std::string cell = trim(std::string_view(content).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v[c]);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || (c < 2 && comma == std::string::npos))
        throw ParseError(path.string() + ":" + std::to_string(line) + ": expected 'a,S,I'");
      pos = comma == std::string::npos ? content.size() : comma + 1;
    }
    if (!t.a.empty() && !(v[0] > t.a.back()))
      throw ParseError(path.string() + ":" + std::to_string(line) + ": ages must increase");
    t.a.push_back(v[0]);
    t.S.push_back(v[1]);
    t.I.push_back(v[2]);
  }
  if (t.a.size() < 2) throw ParseError(path.string() + ": initial profile needs at least two rows");
  return t;
}

// piecewise-linear interpolation, clamped to the table ends
double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), at) - x.begin());
  const double w = (at - x[hi - 1]) / (x[hi] - x[hi - 1]);
  return (1 - w) * y[hi - 1] + w * y[hi];
}

}  // namespace

InitialData<double> initial_data(const ScenarioConfig& cfg) {
  InitialData<double> d;
  d.N_F0 = cfg.initial.N_F0;
  d.N_I0 = cfg.initial.N_I0;
  const auto p = cfg.params;
  switch (cfg.initial.kind) {
    case InitialProfile::SpikeAtZero: {
      const double spike = cfg.initial.spike;
      d.S0 = [spike](double a) { return a == 0 ? spike : 0.0; };
      d.I0 = [](double) { return 0.0; };
      break;
    }
    case InitialProfile::SteadyState:
      d.S0 = [p](double a) { return p.recruitment_m * survival_probability(a, p); };
      d.I0 = [](double) { return 0.0; };
      break;
    case InitialProfile::File: {
      auto table = std::make_shared<ProfileTable>(read_profile_file(cfg.initial.file));
      if (table->a.front() > 0 || table->a.back() < p.a_max)
        throw ParseError(cfg.initial.file.string() + ": ages must cover [0, a_max]");
      d.S0 = [table](double a) { return interpolate(table->a, table->S, a); };
      d.I0 = [table](double a) { return interpolate(table->a, table->I, a); };
      break;
    }
  }
  return d;
}

DiscreteState<double> make_initial_state(const ScenarioConfig& cfg, double h) {
  const auto d = initial_data(cfg);
  return initial_state<double>(h, cfg.params, d.S0, d.I0, d.N_F0, d.N_I0);
}

}  // namespace nemasim
