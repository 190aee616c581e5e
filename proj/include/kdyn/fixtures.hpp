#pragma once

#include "kdyn/walk.hpp"

namespace kdyn::fixtures {

// Ternary Cantor set at the working depth used by the examples.
Space space(int depth = 5);

PrefixTable table_H();
PrefixTable table_R();
PrefixTable table_G3();
PrefixTable table_A1();
PrefixTable table_A2();

PAHomeo H(const Space& k);
PAHomeo R(const Space& k);
PAHomeo G3(const Space& k);
PAHomeo A1(const Space& k);
PAHomeo A2(const Space& k);

// Uniform walks: ⟨A1,A2⟩ with inverses, the Klein four-group ⟨H,R⟩, and the identity alone.
WalkModel free_model(const Space& k, std::uint64_t seed = 0);
WalkModel klein_model(const Space& k, std::uint64_t seed = 0);
WalkModel identity_model(const Space& k, std::uint64_t seed = 0);

}  // namespace kdyn::fixtures
