#include "kdyn/fixtures.hpp"

namespace kdyn::fixtures {

Space space(int depth) { return share(ternary_cantor(depth)); }

PrefixTable table_H() { return {{"0", "2", 1}, {"2", "0", 1}}; }
PrefixTable table_R() { return {{"", "", -1}}; }
PrefixTable table_G3() { return {{"0", "00", 1}, {"20", "02", 1}, {"22", "2", 1}}; }
PrefixTable table_A1() { return {{"0", "020", 1}, {"20", "022", 1}, {"220", "00", 1}, {"222", "2", 1}}; }
PrefixTable table_A2() { return {{"2", "202", 1}, {"02", "200", 1}, {"000", "22", 1}, {"002", "0", 1}}; }

PAHomeo H(const Space& k) { return PAHomeo::from_prefix_table(table_H(), k, {"H"}); }
PAHomeo R(const Space& k) { return PAHomeo::from_prefix_table(table_R(), k, {"R"}); }
PAHomeo G3(const Space& k) { return PAHomeo::from_prefix_table(table_G3(), k, {"G3"}); }
PAHomeo A1(const Space& k) { return PAHomeo::from_prefix_table(table_A1(), k, {"A1"}); }
PAHomeo A2(const Space& k) { return PAHomeo::from_prefix_table(table_A2(), k, {"A2"}); }

WalkModel free_model(const Space& k, std::uint64_t seed) {
  auto a1 = A1(k), a2 = A2(k);
  return WalkModel::uniform({"A1", "A2", "A1^-1", "A2^-1"}, {a1, a2, invert(a1), invert(a2)}, seed);
}

WalkModel klein_model(const Space& k, std::uint64_t seed) {
  return WalkModel::uniform({"H", "R"}, {H(k), R(k)}, seed);
}

WalkModel identity_model(const Space& k, std::uint64_t seed) {
  return WalkModel::uniform({"id"}, {PAHomeo::identity(k)}, seed);
}

}  // namespace kdyn::fixtures
