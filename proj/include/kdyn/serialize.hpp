#pragma once

#include "kdyn/certify.hpp"
#include "kdyn/giet.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace kdyn {

using Json = nlohmann::json;

// Malformed document; `where` is a JSON pointer to the offending field.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

Json rational_json(const Rational& q);
Rational rational_from_json(const Json& j, const std::string& where);
std::vector<Rational> rationals_from_json(const Json& j, const std::string& where);

// IFS spaces as {"ifs": {...}}, interval unions as a plain array of [l, r].
Json space_json(const CompactSet& k);
Space space_from_json(const Json& j, const std::string& where = "/space");

Json region_json(const Region& r);
Region region_from_json(const Json& j, const Space& k, const std::string& where);

Json points_json(const PointSet& p);
PointSet points_from_json(const Json& j, const CompactSet& k, const std::string& where);

Json prefix_table_json(const PrefixTable& t);
PrefixTable prefix_table_from_json(const Json& j, const std::string& where);
Json branches_json(const std::vector<Branch>& bs);
std::vector<Branch> branches_from_json(const Json& j, const std::string& where);

// {"label": [...], "branches": [...]}; a "prefix_table" is accepted in place of branches.
Json map_json(const PAHomeo& f);
PAHomeo map_from_json(const Json& j, const Space& k, const std::string& where);

Json giet_json(const Giet& g);
Giet giet_from_json(const Json& j, const std::string& where);

Json periodic_json(const std::vector<PeriodicPoint>& pts);

// Certificates carry their space and maps, so they verify on their own.
Json certificate_json(const PingPongCertificate& c);
Json certificate_json(const std::vector<PAHomeo>& gens, const FiniteOrbitCertificate& c);
Json certificate_json(const std::vector<PAHomeo>& gens, const InvariantMeasureCertificate& c);
Json certificate_json(const MorseSmaleCertificate& c);
// Farkas vector for the invariance system of gens at the given depth.
Json infeasibility_json(const std::vector<PAHomeo>& gens, int depth, const std::vector<Rational>& farkas);

struct CertificateCheck {
  std::string kind;
  Verdict verdict;
};

// Throws SchemaError on malformed input.
CertificateCheck verify_certificate(const Json& j);

// Two-space indentation, sorted keys, trailing newline.
std::string dump(const Json& j);
Json parse_json(const std::string& text);
std::string read_file(const std::filesystem::path& p);
// Writes to a sibling temporary and renames it into place.
void write_atomic(const std::filesystem::path& p, const std::string& content);

}  // namespace kdyn
