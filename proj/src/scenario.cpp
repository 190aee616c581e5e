#include "kdyn/scenario.hpp"

#include <map>
#include <set>

namespace kdyn {

namespace {

const std::map<std::string, ScenarioKind> kKinds{
    {"simulate", ScenarioKind::simulate},       {"certify-free", ScenarioKind::certify_free},
    {"find-measure", ScenarioKind::find_measure}, {"morse-smale", ScenarioKind::morse_smale},
    {"giet-blowup", ScenarioKind::giet_blowup},   {"verify", ScenarioKind::verify}};

const std::set<std::string> kBudgetKeys{"n",     "runs", "steps", "p_cap", "max_len", "d_max", "depth",
                                        "L",     "eps",  "rho",   "radius", "word"};

std::size_t count_from(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long>() >= 0))
    throw SchemaError(where, "expected a non-negative integer");
  return j.get<std::size_t>();
}

int int_from(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw SchemaError(where, "expected an integer");
  return j.get<int>();
}

Json spans_json(const SpanUnion& u) {
  Json a = Json::array();
  for (const auto& s : u.spans())
    a.push_back({{"lo", rational_json(s.lo)},
                 {"hi", rational_json(s.hi)},
                 {"lo_closed", s.lo_closed},
                 {"hi_closed", s.hi_closed}});
  return a;
}

SpanUnion spans_from(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where, "expected an array of spans");
  std::vector<Span> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "/" + std::to_string(i);
    if (!j[i].is_object() || !j[i].contains("lo") || !j[i].contains("hi")) throw SchemaError(w, "expected {lo, hi}");
    Span s{rational_from_json(j[i]["lo"], w + "/lo"), rational_from_json(j[i]["hi"], w + "/hi")};
    if (j[i].contains("lo_closed")) s.lo_closed = j[i]["lo_closed"].get<bool>();
    if (j[i].contains("hi_closed")) s.hi_closed = j[i]["hi_closed"].get<bool>();
    if (s.hi < s.lo) throw SchemaError(w, "hi < lo");
    out.push_back(s);
  }
  return SpanUnion(std::move(out));
}

BudgetSpec budgets_from(const Json& j) {
  const std::string w = "/budgets";
  if (!j.is_object()) throw SchemaError(w, "expected an object");
  for (const auto& [key, v] : j.items())
    if (!kBudgetKeys.count(key)) throw SchemaError(w + "/" + key, "unknown budget field");
  BudgetSpec b;
  auto cnt = [&](const char* k, std::optional<std::size_t>& f) {
    if (j.contains(k)) f = count_from(j[k], w + "/" + k);
  };
  auto num = [&](const char* k, std::optional<int>& f) {
    if (j.contains(k)) f = int_from(j[k], w + "/" + k);
  };
  auto rat = [&](const char* k, std::optional<Rational>& f) {
    if (j.contains(k)) f = rational_from_json(j[k], w + "/" + k);
  };
  cnt("n", b.n);
  cnt("runs", b.runs);
  cnt("steps", b.steps);
  cnt("p_cap", b.p_cap);
  num("max_len", b.max_len);
  num("d_max", b.d_max);
  num("depth", b.depth);
  num("L", b.L);
  rat("eps", b.eps);
  rat("rho", b.rho);
  rat("radius", b.radius);
  if (j.contains("word")) {
    if (!j["word"].is_array()) throw SchemaError(w + "/word", "expected a list of generator names");
    Word word;
    for (const auto& x : j["word"]) {
      if (!x.is_string()) throw SchemaError(w + "/word", "expected a list of generator names");
      word.push_back(x.get<std::string>());
    }
    b.word = word;
  }
  for (const auto& [name, v] : {std::pair{"eps", &b.eps}, {"rho", &b.rho}, {"radius", &b.radius}})
    if (*v && !(**v > 0)) throw SchemaError(w + "/" + name, "must be positive");
  return b;
}

Json budgets_to(const BudgetSpec& b) {
  Json j = Json::object();
  auto put = [&](const char* k, const auto& f) {
    if (f) j[k] = *f;
  };
  put("n", b.n);
  put("runs", b.runs);
  put("steps", b.steps);
  put("p_cap", b.p_cap);
  put("max_len", b.max_len);
  put("d_max", b.d_max);
  put("depth", b.depth);
  put("L", b.L);
  if (b.eps) j["eps"] = rational_json(*b.eps);
  if (b.rho) j["rho"] = rational_json(*b.rho);
  if (b.radius) j["radius"] = rational_json(*b.radius);
  if (b.word) j["word"] = *b.word;
  return j;
}

std::size_t max_address(const PrefixTable& t) {
  std::size_t m = 0;
  for (const auto& r : t) m = std::max({m, r.src.size(), r.dst.size()});
  return m;
}

void validate(const Scenario& s) {
  const bool giet_kind = s.kind == ScenarioKind::giet_blowup;
  if (s.kind == ScenarioKind::verify) {
    if (!s.certificate) throw SchemaError("/certificate", "verify scenarios name a certificate file");
    return;
  }
  if (!giet_kind && !s.space) throw SchemaError("/space", "missing field \"space\"");
  if (s.generators.empty()) throw SchemaError("/generators", "at least one generator is required");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < s.generators.size(); ++i) {
    const auto& g = s.generators[i];
    const std::string w = "/generators/" + std::to_string(i);
    if (g.name.empty()) throw SchemaError(w + "/name", "empty generator name");
    if (!index.emplace(g.name, i).second) throw SchemaError(w + "/name", "duplicate generator \"" + g.name + "\"");
    int sources = g.prefix_table.has_value() + g.branches.has_value() + g.giet.has_value() + g.inverse_of.has_value();
    if (sources != 1)
      throw SchemaError(w, "give exactly one of prefix_table, branches, giet, inverse_of");
    if (giet_kind && !g.giet && !g.inverse_of) throw SchemaError(w, "giet-blowup scenarios take GIET generators");
    if (!giet_kind && g.giet) throw SchemaError(w, "GIET generators are only used by giet-blowup");
    if (g.prefix_table && s.space) {
      if (!s.space->structured()) throw SchemaError(w + "/prefix_table", "prefix tables need an IFS space");
      if (max_address(*g.prefix_table) > static_cast<std::size_t>(s.space->depth()))
        throw SchemaError(w + "/prefix_table", "space depth " + std::to_string(s.space->depth()) +
                                                   " is below the table's address length");
    }
  }
  for (std::size_t i = 0; i < s.generators.size(); ++i) {
    const auto& g = s.generators[i];
    if (!g.inverse_of) continue;
    auto it = index.find(*g.inverse_of);
    const std::string w = "/generators/" + std::to_string(i) + "/inverse_of";
    if (it == index.end()) throw SchemaError(w, "unknown generator \"" + *g.inverse_of + "\"");
    if (s.generators[it->second].inverse_of) throw SchemaError(w, "inverse_of must name a defined map");
  }

  if (!s.probabilities.empty()) {
    if (s.probabilities.size() != s.generators.size())
      throw SchemaError("/probabilities", "expected one probability per generator");
    Rational sum = 0;
    for (std::size_t i = 0; i < s.probabilities.size(); ++i) {
      if (!(s.probabilities[i] > 0))
        throw SchemaError("/probabilities/" + std::to_string(i), "probabilities must be positive");
      sum += s.probabilities[i];
    }
    if (sum != 1) throw SchemaError("/probabilities", "probabilities sum " + to_string(sum) + " ≠ 1");
  }
  if (s.budgets.word)
    for (std::size_t i = 0; i < s.budgets.word->size(); ++i) {
      const auto& name = (*s.budgets.word)[i];
      if (!index.count(name) && !index.count(inverse_name(name)))
        throw SchemaError("/budgets/word/" + std::to_string(i), "unknown generator \"" + name + "\"");
    }
  if (s.region_A.has_value() != s.region_B.has_value())
    throw SchemaError("/regions", "give both A and B or neither");

  // every map must build
  if (giet_kind)
    build_giets(s);
  else
    build_model(s);
}

}  // namespace

std::string to_string(ScenarioKind k) {
  for (const auto& [name, v] : kKinds)
    if (v == k) return name;
  return "?";
}

std::optional<ScenarioKind> scenario_kind(const std::string& s) {
  auto it = kKinds.find(s);
  if (it == kKinds.end()) return std::nullopt;
  return it->second;
}

bool GeneratorSpec::operator==(const GeneratorSpec& o) const {
  if (name != o.name || prefix_table != o.prefix_table || branches != o.branches || inverse_of != o.inverse_of)
    return false;
  if (giet.has_value() != o.giet.has_value()) return false;
  return !giet || giet_json(*giet) == giet_json(*o.giet);
}

bool Scenario::operator==(const Scenario& o) const {
  if (space.get() != o.space.get() && (!space || !o.space || !(*space == *o.space))) return false;
  return kind == o.kind && generators == o.generators && probabilities == o.probabilities && seed == o.seed &&
         budgets == o.budgets && region_A == o.region_A && region_B == o.region_B && certificate == o.certificate &&
         out_dir == o.out_dir && emit_series == o.emit_series;
}

Budget budget_profile(const std::string& name) {
  Budget b{40, 100, 20000, 4, 6, 6, 3, 3, Rational(1, 27), Rational(1, 4), Rational(1, 81)};
  if (name == "default") return b;
  if (name == "quick") {
    b.n = 30;
    b.runs = 20;
    b.steps = 5000;
    b.max_len = 4;
    b.d_max = 4;
    return b;
  }
  if (name == "thorough") {
    b.n = 60;
    b.runs = 400;
    b.steps = 100000;
    b.max_len = 8;
    b.d_max = 8;
    return b;
  }
  throw std::invalid_argument("unknown budget profile \"" + name + "\" (expected quick, default or thorough)");
}

Budget resolve(const BudgetSpec& s, const Budget& p) {
  Budget b = p;
  if (s.n) b.n = *s.n;
  if (s.runs) b.runs = *s.runs;
  if (s.steps) b.steps = *s.steps;
  if (s.p_cap) b.p_cap = *s.p_cap;
  if (s.max_len) b.max_len = *s.max_len;
  if (s.d_max) b.d_max = *s.d_max;
  if (s.depth) b.depth = *s.depth;
  if (s.L) b.L = *s.L;
  if (s.eps) b.eps = *s.eps;
  if (s.rho) b.rho = *s.rho;
  if (s.radius) b.radius = *s.radius;
  return b;
}

Json budget_json(const Budget& b) {
  return {{"n", b.n},         {"runs", b.runs},     {"steps", b.steps}, {"p_cap", b.p_cap},
          {"max_len", b.max_len}, {"d_max", b.d_max}, {"depth", b.depth}, {"L", b.L},
          {"eps", rational_json(b.eps)}, {"rho", rational_json(b.rho)}, {"radius", rational_json(b.radius)}};
}

Scenario scenario_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("", "a scenario is a JSON object");
  static const std::set<std::string> top{"kind",    "space",       "generators", "probabilities", "seed",
                                         "budgets", "regions",     "certificate", "output"};
  for (const auto& [key, v] : j.items())
    if (!top.count(key)) throw SchemaError("/" + key, "unknown field");

  Scenario s;
  if (!j.contains("kind") || !j["kind"].is_string()) throw SchemaError("/kind", "missing or non-string kind");
  auto kind = scenario_kind(j["kind"].get<std::string>());
  if (!kind) throw SchemaError("/kind", "unknown kind \"" + j["kind"].get<std::string>() + "\"");
  s.kind = *kind;
  if (j.contains("space")) s.space = space_from_json(j["space"], "/space");
  if (j.contains("generators")) {
    const Json& gs = j["generators"];
    if (!gs.is_array()) throw SchemaError("/generators", "expected an array");
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const std::string w = "/generators/" + std::to_string(i);
      const Json& g = gs[i];
      if (!g.is_object() || !g.contains("name") || !g["name"].is_string()) throw SchemaError(w, "missing name");
      GeneratorSpec spec;
      spec.name = g["name"].get<std::string>();
      if (g.contains("prefix_table")) spec.prefix_table = prefix_table_from_json(g["prefix_table"], w + "/prefix_table");
      if (g.contains("branches")) spec.branches = branches_from_json(g["branches"], w + "/branches");
      if (g.contains("giet")) spec.giet = giet_from_json(g["giet"], w + "/giet");
      if (g.contains("inverse_of")) {
        if (!g["inverse_of"].is_string()) throw SchemaError(w + "/inverse_of", "expected a name");
        spec.inverse_of = g["inverse_of"].get<std::string>();
      }
      s.generators.push_back(std::move(spec));
    }
  }
  if (j.contains("probabilities")) s.probabilities = rationals_from_json(j["probabilities"], "/probabilities");
  if (j.contains("seed")) s.seed = count_from(j["seed"], "/seed");
  if (j.contains("budgets")) s.budgets = budgets_from(j["budgets"]);
  if (j.contains("regions")) {
    const Json& r = j["regions"];
    if (!r.is_object() || !r.contains("A") || !r.contains("B")) throw SchemaError("/regions", "expected {A, B}");
    s.region_A = spans_from(r["A"], "/regions/A");
    s.region_B = spans_from(r["B"], "/regions/B");
  }
  if (j.contains("certificate")) {
    if (!j["certificate"].is_string()) throw SchemaError("/certificate", "expected a path");
    s.certificate = j["certificate"].get<std::string>();
  }
  if (j.contains("output")) {
    const Json& o = j["output"];
    if (!o.is_object()) throw SchemaError("/output", "expected an object");
    if (o.contains("dir")) s.out_dir = o["dir"].get<std::string>();
    if (o.contains("emit_series")) s.emit_series = o["emit_series"].get<bool>();
  }
  validate(s);
  return s;
}

Scenario parse_scenario(const std::string& text) { return scenario_from_json(parse_json(text)); }

Json scenario_json(const Scenario& s) {
  Json j = {{"kind", to_string(s.kind)}, {"seed", s.seed}};
  if (s.space) j["space"] = space_json(*s.space);
  if (!s.generators.empty()) {
    Json gs = Json::array();
    for (const auto& g : s.generators) {
      Json x = {{"name", g.name}};
      if (g.prefix_table) x["prefix_table"] = prefix_table_json(*g.prefix_table);
      if (g.branches) x["branches"] = branches_json(*g.branches);
      if (g.giet) x["giet"] = giet_json(*g.giet);
      if (g.inverse_of) x["inverse_of"] = *g.inverse_of;
      gs.push_back(std::move(x));
    }
    j["generators"] = gs;
  }
  if (!s.probabilities.empty()) {
    Json p = Json::array();
    for (const auto& x : s.probabilities) p.push_back(rational_json(x));
    j["probabilities"] = p;
  }
  if (auto b = budgets_to(s.budgets); !b.empty()) j["budgets"] = b;
  if (s.region_A) j["regions"] = {{"A", spans_json(*s.region_A)}, {"B", spans_json(*s.region_B)}};
  if (s.certificate) j["certificate"] = *s.certificate;
  Json out = Json::object();
  if (!s.out_dir.empty()) out["dir"] = s.out_dir;
  if (s.emit_series) out["emit_series"] = true;
  if (!out.empty()) j["output"] = out;
  return j;
}

std::vector<std::string> generator_names(const Scenario& s) {
  std::vector<std::string> out;
  for (const auto& g : s.generators) out.push_back(g.name);
  return out;
}

WalkModel build_model(const Scenario& s) {
  if (!s.space) throw std::invalid_argument("scenario has no space");
  std::map<std::string, PAHomeo> built;
  std::vector<PAHomeo> maps;
  for (std::size_t i = 0; i < s.generators.size(); ++i) {
    const auto& g = s.generators[i];
    const std::string w = "/generators/" + std::to_string(i);
    try {
      if (g.prefix_table) built.emplace(g.name, PAHomeo::from_prefix_table(*g.prefix_table, s.space, {g.name}));
      if (g.branches) built.emplace(g.name, PAHomeo::make(s.space, *g.branches, {g.name}));
    } catch (const std::exception& e) {
      throw SchemaError(w, e.what());
    }
    if (g.giet) throw SchemaError(w, "GIET generators need the giet-blowup command");
  }
  for (const auto& g : s.generators) {
    if (g.inverse_of) built.emplace(g.name, invert(built.at(*g.inverse_of)));
    maps.push_back(built.at(g.name));
  }
  auto probs = s.probabilities;
  if (probs.empty()) probs.assign(maps.size(), Rational(1, static_cast<long>(maps.size())));
  try {
    return WalkModel::make(generator_names(s), std::move(maps), std::move(probs), s.seed);
  } catch (const std::exception& e) {
    throw SchemaError("/generators", e.what());
  }
}

std::vector<Giet> build_giets(const Scenario& s) {
  std::map<std::string, Giet> built;
  for (const auto& g : s.generators)
    if (g.giet) built.emplace(g.name, Giet::make(g.giet->interval(), g.giet->branches(), g.name));
  std::vector<Giet> out;
  for (const auto& g : s.generators) {
    if (g.inverse_of) {
      auto inv = built.at(*g.inverse_of).inverse();
      out.push_back(Giet::make(inv.interval(), inv.branches(), g.name));
    } else if (g.giet) {
      out.push_back(built.at(g.name));
    } else {
      throw SchemaError("/generators", "giet-blowup scenarios take GIET generators");
    }
  }
  if (out.size() > 1)
    for (const auto& g : out)
      if (!(g.interval() == out.front().interval()))
        throw SchemaError("/generators", "GIETs act on different intervals");
  return out;
}

PAHomeo word_element(const WalkModel& model, const Word& w) {
  PAHomeo g = PAHomeo::identity(model.space());
  const auto& names = model.names();
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    auto pos = std::find(names.begin(), names.end(), *it);
    if (pos != names.end()) {
      g = compose(model.maps()[pos - names.begin()], g);
      continue;
    }
    auto inv = std::find(names.begin(), names.end(), inverse_name(*it));
    if (inv == names.end()) throw SchemaError("/budgets/word", "unknown generator \"" + *it + "\"");
    g = compose(model.inverses()[inv - names.begin()], g);
  }
  return g.with_label(w);
}

}  // namespace kdyn
