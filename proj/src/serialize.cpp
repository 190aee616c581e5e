#include "kdyn/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

namespace kdyn {

namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string join(const std::string& where, const std::string& key) { return where + "/" + key; }

int int_from_json(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw SchemaError(where, "expected an integer");
  return j.get<int>();
}

std::string string_from_json(const Json& j, const std::string& where) {
  if (!j.is_string()) throw SchemaError(where, "expected a string");
  return j.get<std::string>();
}

Json interval_json(const Interval& iv) { return Json::array({rational_json(iv.lo), rational_json(iv.hi)}); }

Interval interval_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(where, "expected [lo, hi]");
  return {rational_from_json(j[0], where + "/0"), rational_from_json(j[1], where + "/1")};
}

Json maps_json(const std::vector<PAHomeo>& gens) {
  Json a = Json::array();
  for (const auto& g : gens) a.push_back(map_json(g));
  return a;
}

std::vector<PAHomeo> maps_from_json(const Json& j, const Space& k, const std::string& where) {
  if (!j.is_array() || j.empty()) throw SchemaError(where, "expected a non-empty array of maps");
  std::vector<PAHomeo> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(map_from_json(j[i], k, join(where, std::to_string(i))));
  return out;
}

Json word_json(const Word& w) { return Json(w); }

Word word_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where, "expected a list of names");
  Word w;
  for (std::size_t i = 0; i < j.size(); ++i) w.push_back(string_from_json(j[i], join(where, std::to_string(i))));
  return w;
}

// Natural letters of an IFS: the base-b digit of each piece, when that makes sense.
std::string default_alphabet(const std::vector<Rational>& ratios, const std::vector<Rational>& offsets) {
  std::string a;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    Rational d = offsets[i] / ratios[i];
    if (d.get_den() != 1 || d < 0 || d > 9) break;
    a.push_back(static_cast<char>('0' + d.get_num().get_si()));
  }
  if (a.size() == ratios.size() && std::set<char>(a.begin(), a.end()).size() == a.size()) return a;
  a.clear();
  for (std::size_t i = 0; i < ratios.size(); ++i) a.push_back(static_cast<char>(i < 10 ? '0' + i : 'a' + i - 10));
  return a;
}

}  // namespace

Json rational_json(const Rational& q) { return to_string(q); }

Rational rational_from_json(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (!j.is_string()) throw SchemaError(where, "expected a rational string \"p/q\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const std::exception& e) {
    throw SchemaError(where, e.what());
  }
}

std::vector<Rational> rationals_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where, "expected an array of rationals");
  std::vector<Rational> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(rational_from_json(j[i], join(where, std::to_string(i))));
  return out;
}

Json space_json(const CompactSet& k) {
  if (const auto& ifs = k.ifs()) {
    Json r = Json::array(), o = Json::array();
    for (const auto& x : ifs->ratios) r.push_back(rational_json(x));
    for (const auto& x : ifs->offsets) o.push_back(rational_json(x));
    return {{"ifs", {{"ratios", r}, {"offsets", o}, {"alphabet", ifs->alphabet}, {"depth", ifs->depth}}}};
  }
  Json a = Json::array();
  for (const auto& iv : k.intervals()) a.push_back(interval_json(iv));
  return a;
}

Space space_from_json(const Json& j, const std::string& where) {
  try {
    if (j.is_array()) {
      std::vector<Interval> ivs;
      for (std::size_t i = 0; i < j.size(); ++i) ivs.push_back(interval_from_json(j[i], join(where, std::to_string(i))));
      return share(CompactSet::from_intervals(std::move(ivs)));
    }
    const std::string w = join(where, "ifs");
    const Json& d = field(j, "ifs", where);
    IfsDescriptor ifs;
    ifs.ratios = rationals_from_json(field(d, "ratios", w), join(w, "ratios"));
    ifs.offsets = rationals_from_json(field(d, "offsets", w), join(w, "offsets"));
    if (ifs.ratios.size() != ifs.offsets.size()) throw SchemaError(w, "ratios and offsets differ in length");
    ifs.depth = int_from_json(field(d, "depth", w), join(w, "depth"));
    ifs.alphabet = d.contains("alphabet") ? string_from_json(d["alphabet"], join(w, "alphabet"))
                                          : default_alphabet(ifs.ratios, ifs.offsets);
    return share(CompactSet::from_ifs(std::move(ifs)));
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(where, e.what());
  }
}

Json region_json(const Region& r) {
  Json a = Json::array();
  for (const auto& s : r.set().spans())
    a.push_back({{"lo", rational_json(s.lo)},
                 {"hi", rational_json(s.hi)},
                 {"lo_closed", s.lo_closed},
                 {"hi_closed", s.hi_closed}});
  return a;
}

Region region_from_json(const Json& j, const Space& k, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where, "expected an array of spans");
  std::vector<Span> spans;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = join(where, std::to_string(i));
    const Json& s = j[i];
    Span sp{rational_from_json(field(s, "lo", w), join(w, "lo")), rational_from_json(field(s, "hi", w), join(w, "hi"))};
    if (s.contains("lo_closed")) sp.lo_closed = s["lo_closed"].get<bool>();
    if (s.contains("hi_closed")) sp.hi_closed = s["hi_closed"].get<bool>();
    if (sp.hi < sp.lo) throw SchemaError(w, "hi < lo");
    spans.push_back(sp);
  }
  return Region(k, SpanUnion(std::move(spans)));
}

Json points_json(const PointSet& p) {
  Json a = Json::array();
  for (const auto& x : p.points()) a.push_back(rational_json(x));
  return a;
}

PointSet points_from_json(const Json& j, const CompactSet& k, const std::string& where) {
  try {
    return PointSet::make(k, rationals_from_json(j, where));
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(where, e.what());
  }
}

Json prefix_table_json(const PrefixTable& t) {
  Json a = Json::array();
  for (const auto& r : t) a.push_back({{"src", r.src}, {"dst", r.dst}, {"sign", r.sign}});
  return a;
}

PrefixTable prefix_table_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where, "expected an array of rules");
  PrefixTable t;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = join(where, std::to_string(i));
    PrefixRule r{string_from_json(field(j[i], "src", w), join(w, "src")),
                 string_from_json(field(j[i], "dst", w), join(w, "dst"))};
    if (j[i].contains("sign")) r.sign = int_from_json(j[i]["sign"], join(w, "sign"));
    if (r.sign != 1 && r.sign != -1) throw SchemaError(join(w, "sign"), "sign must be 1 or -1");
    t.push_back(r);
  }
  return t;
}

Json branches_json(const std::vector<Branch>& bs) {
  Json a = Json::array();
  for (const auto& b : bs)
    a.push_back({{"source", interval_json(b.source)}, {"slope", rational_json(b.slope)}, {"offset", rational_json(b.offset)}});
  return a;
}

std::vector<Branch> branches_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where, "expected an array of branches");
  std::vector<Branch> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = join(where, std::to_string(i));
    out.push_back({interval_from_json(field(j[i], "source", w), join(w, "source")),
                   rational_from_json(field(j[i], "slope", w), join(w, "slope")),
                   rational_from_json(field(j[i], "offset", w), join(w, "offset"))});
  }
  return out;
}

Json map_json(const PAHomeo& f) { return {{"label", word_json(f.label())}, {"branches", branches_json(f.branches())}}; }

PAHomeo map_from_json(const Json& j, const Space& k, const std::string& where) {
  Word label = j.contains("label") ? word_from_json(j["label"], join(where, "label")) : Word{};
  try {
    if (j.contains("prefix_table"))
      return PAHomeo::from_prefix_table(prefix_table_from_json(j["prefix_table"], join(where, "prefix_table")), k,
                                        label);
    return PAHomeo::make(k, branches_from_json(field(j, "branches", where), join(where, "branches")), label);
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(where, e.what());
  }
}

Json giet_json(const Giet& g) {
  Json bs = Json::array();
  for (const auto& b : g.branches())
    bs.push_back({{"src", Json::array({rational_json(b.lo), rational_json(b.hi)})},
                  {"slope", rational_json(b.slope)},
                  {"offset", rational_json(b.offset)}});
  return {{"interval", interval_json(g.interval())}, {"branches", bs}};
}

Giet giet_from_json(const Json& j, const std::string& where) {
  Interval iv = interval_from_json(field(j, "interval", where), join(where, "interval"));
  const std::string wb = join(where, "branches");
  const Json& bs = field(j, "branches", where);
  if (!bs.is_array()) throw SchemaError(wb, "expected an array of branches");
  std::vector<GietBranch> out;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const std::string w = join(wb, std::to_string(i));
    Interval src = interval_from_json(field(bs[i], "src", w), join(w, "src"));
    out.push_back({src.lo, src.hi, rational_from_json(field(bs[i], "slope", w), join(w, "slope")),
                   rational_from_json(field(bs[i], "offset", w), join(w, "offset"))});
  }
  try {
    return Giet::make(iv, std::move(out));
  } catch (const std::exception& e) {
    throw SchemaError(where, e.what());
  }
}

Json periodic_json(const std::vector<PeriodicPoint>& pts) {
  Json a = Json::array();
  for (const auto& p : pts)
    a.push_back({{"x", rational_json(p.x)}, {"period", p.period}, {"multiplier", rational_json(p.multiplier)}});
  return a;
}

Json certificate_json(const PingPongCertificate& c) {
  return {{"kind", "ping-pong"},
          {"space", space_json(*c.a1.space())},
          {"a1", map_json(c.a1)},
          {"a2", map_json(c.a2)},
          {"A1", region_json(c.A1)},
          {"B1", region_json(c.B1)},
          {"A2", region_json(c.A2)},
          {"B2", region_json(c.B2)}};
}

Json certificate_json(const std::vector<PAHomeo>& gens, const FiniteOrbitCertificate& c) {
  return {{"kind", "finite-orbit"},
          {"space", space_json(*gens.front().space())},
          {"generators", maps_json(gens)},
          {"orbit", points_json(c.orbit)}};
}

Json certificate_json(const std::vector<PAHomeo>& gens, const InvariantMeasureCertificate& c) {
  Json m = Json::array();
  for (const auto& x : *c.masses.exact) m.push_back(rational_json(x));
  return {{"kind", "invariant-measure"},
          {"space", space_json(*gens.front().space())},
          {"generators", maps_json(gens)},
          {"depth", c.depth},
          {"masses", m},
          {"consistency_depth", c.consistency_depth}};
}

Json certificate_json(const MorseSmaleCertificate& c) {
  return {{"kind", "morse-smale"},
          {"space", space_json(*c.g.space())},
          {"g", map_json(c.g)},
          {"A", region_json(c.A)},
          {"B", region_json(c.B)},
          {"periodic", periodic_json(c.periodic)}};
}

Json infeasibility_json(const std::vector<PAHomeo>& gens, int depth, const std::vector<Rational>& farkas) {
  Json y = Json::array();
  for (const auto& x : farkas) y.push_back(rational_json(x));
  return {{"kind", "measure-infeasibility"},
          {"space", space_json(*gens.front().space())},
          {"generators", maps_json(gens)},
          {"depth", depth},
          {"farkas", y}};
}

CertificateCheck verify_certificate(const Json& j) {
  CertificateCheck out;
  out.kind = string_from_json(field(j, "kind", ""), "/kind");
  Space k = space_from_json(field(j, "space", ""), "/space");
  auto fail = [&](std::string why) {
    out.verdict = {false, std::move(why)};
    return out;
  };

  if (out.kind == "ping-pong") {
    PingPongCertificate c{map_from_json(field(j, "a1", ""), k, "/a1"),
                          map_from_json(field(j, "a2", ""), k, "/a2"),
                          region_from_json(field(j, "A1", ""), k, "/A1"),
                          region_from_json(field(j, "B1", ""), k, "/B1"),
                          region_from_json(field(j, "A2", ""), k, "/A2"),
                          region_from_json(field(j, "B2", ""), k, "/B2")};
    out.verdict = verify_ping_pong(c);
    return out;
  }
  if (out.kind == "finite-orbit") {
    auto gens = maps_from_json(field(j, "generators", ""), k, "/generators");
    auto orbit = points_from_json(field(j, "orbit", ""), *k, "/orbit");
    if (orbit.empty()) return fail("empty orbit");
    if (!verify_finite_orbit(gens, orbit).verified) return fail("orbit is not invariant");
    out.verdict = {true, ""};
    return out;
  }
  if (out.kind == "invariant-measure") {
    auto gens = maps_from_json(field(j, "generators", ""), k, "/generators");
    InvariantMeasureCertificate c;
    c.depth = int_from_json(field(j, "depth", ""), "/depth");
    c.consistency_depth = int_from_json(field(j, "consistency_depth", ""), "/consistency_depth");
    c.masses = CellMeasure::from_exact(c.depth, rationals_from_json(field(j, "masses", ""), "/masses"));
    if (c.depth < 0 || c.consistency_depth < c.depth) return fail("bad depths");
    Rational total = 0;
    for (const auto& m : *c.masses.exact) total += m;
    if (total != 1) return fail("masses sum to " + to_string(total));
    if (!verify_invariant_measure(gens, c)) return fail("masses are not invariant");
    if (c.consistency_depth > c.depth) {
      auto s = solve_invariant_measure(gens, c.depth, c.consistency_depth);
      if (!s.cert || s.cert->consistency_depth < c.consistency_depth) return fail("consistency depth not reached");
    }
    out.verdict = {true, ""};
    return out;
  }
  if (out.kind == "morse-smale") {
    auto g = map_from_json(field(j, "g", ""), k, "/g");
    auto A = region_from_json(field(j, "A", ""), k, "/A");
    auto B = region_from_json(field(j, "B", ""), k, "/B");
    MorseSmaleResult r;
    try {
      r = check_morse_smale(g, A, B);
    } catch (const std::exception& e) {
      return fail(e.what());
    }
    if (!r.cert) return fail(r.reason);
    std::vector<PeriodicPoint> claimed;
    const Json& pj = field(j, "periodic", "");
    for (std::size_t i = 0; i < pj.size(); ++i) {
      const std::string w = "/periodic/" + std::to_string(i);
      claimed.push_back({rational_from_json(field(pj[i], "x", w), w + "/x"),
                         int_from_json(field(pj[i], "period", w), w + "/period"),
                         rational_from_json(field(pj[i], "multiplier", w), w + "/multiplier")});
    }
    if (claimed != r.cert->periodic) return fail("periodic points differ from the recomputed list");
    out.verdict = {true, ""};
    return out;
  }
  if (out.kind == "measure-infeasibility") {
    auto gens = maps_from_json(field(j, "generators", ""), k, "/generators");
    int depth = int_from_json(field(j, "depth", ""), "/depth");
    auto y = rationals_from_json(field(j, "farkas", ""), "/farkas");
    auto s = solve_invariant_measure(gens, depth, depth);
    if (s.cert) return fail("the system is feasible");
    if (y.size() != s.rows.size()) return fail("certificate length differs from the system");
    if (!check_farkas(s.rows, s.rhs, y)) return fail("not a Farkas certificate");
    out.verdict = {true, ""};
    return out;
  }
  throw SchemaError("/kind", "unknown certificate kind \"" + out.kind + "\"");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("", std::string("JSON syntax: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

}  // namespace kdyn
