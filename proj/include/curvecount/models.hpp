#pragma once

// Canonical counting models: for each curve family the admissible forms that
// the experiments revolve around, keyed by determinant, together with their
// degree-matrix assignments.

#include <map>
#include <utility>
#include <vector>

#include "builder.hpp"
#include "errors.hpp"
#include "hermitian.hpp"
#include "invariants.hpp"

namespace curvecount::models {

// Every degree-matrix assignment compatible with H: the Cartesian product of
// the candidates for each off-diagonal entry, the last pair varying fastest.
inline std::vector<std::map<std::pair<unsigned, unsigned>, MDeg>>
enumerate_assignments(const CurveCase& cse, unsigned k, const HForm& H) {
  std::vector<std::pair<unsigned, unsigned>> pairs;
  std::vector<std::vector<MDeg>> choices;
  for (unsigned i = 0; i < H.n; ++i)
    for (unsigned j = i + 1; j < H.n; ++j) {
      pairs.emplace_back(i, j);
      choices.push_back(M_from_h(cse, k, H.at(i, j)));
      if (choices.back().empty())
        throw invalid_argument_error("form entry admits no degree matrix");
    }
  std::vector<std::map<std::pair<unsigned, unsigned>, MDeg>> out;
  std::vector<std::size_t> idx(pairs.size(), 0);
  for (;;) {
    std::map<std::pair<unsigned, unsigned>, MDeg> a;
    for (std::size_t t = 0; t < pairs.size(); ++t)
      a.emplace(pairs[t], choices[t][idx[t]]);
    out.push_back(std::move(a));
    std::size_t t = pairs.size();
    while (t > 0) {
      if (++idx[t - 1] < choices[t - 1].size()) break;
      idx[t - 1] = 0;
      --t;
    }
    if (t == 0) break;
  }
  return out;
}

// One model per assignment, in enumerate_assignments order.
inline std::vector<CurveModel> family(const CurveCase& cse, const HForm& H) {
  unsigned k = expected_k(cse.c, H.n);
  std::vector<CurveModel> out;
  for (auto& a : enumerate_assignments(cse, k, H))
    out.push_back(make_model(cse, H, std::move(a)));
  return out;
}

// --- (3,3,3), n = 2, k = 2 ---------------------------------------------

inline HForm form_333_det3() {
  return make_hform(3, 2, {{2, 0}, {-1, 0}, {-1, 0}, {2, 0}});
}

inline HForm form_333_det4() {
  return make_hform(3, 2, {{2, 0}, {0, 0}, {0, 0}, {2, 0}});
}

inline std::vector<CurveModel> models_333_det3() {
  return family(make_case(3, 3, 3), form_333_det3());  // 3 assignments
}

inline std::vector<CurveModel> models_333_det4() {
  return family(make_case(3, 3, 3), form_333_det4());  // 6 assignments
}

// --- (2,4,4), n = 2, k = 1 ----------------------------------------------

inline HForm form_244_det2() {
  return make_hform(4, 2, {{2, 0}, {-1, 1}, {-1, -1}, {2, 0}});
}

inline HForm form_244_det4() {
  return make_hform(4, 2, {{2, 0}, {0, 0}, {0, 0}, {2, 0}});
}

inline CurveModel model_244_det2() {
  auto fam = family(make_case(2, 4, 4), form_244_det2());
  if (fam.size() != 1)
    throw invalid_argument_error("expected a unique degree matrix");
  return fam[0];
}

inline std::vector<CurveModel> models_244_det4() {
  return family(make_case(2, 4, 4), form_244_det4());  // 2 assignments
}

// --- (2,4,4), n = 3, k = 2 ----------------------------------------------

// The determinant-16 class member used for the divisor experiments.  Its
// class admits several assignments with different counts; this fixed triple
// is the one whose generic count is a single curve.
inline CurveModel model_244_det16() {
  HForm H = make_hform(4, 3,
                       {{4, 0}, {2, 0}, {0, 2},
                        {2, 0}, {4, 0}, {2, 0},
                        {0, -2}, {2, 0}, {4, 0}});
  CurveCase cse = make_case(2, 4, 4);
  MDeg side{cse, 2, {0, 1, 2, 1, 2, 1, 0, 1}};
  MDeg mid{cse, 2, {1, 2, 1, 0, 1, 0, 1, 2}};
  std::map<std::pair<unsigned, unsigned>, MDeg> M;
  M.emplace(std::make_pair(0u, 1u), side);
  M.emplace(std::make_pair(0u, 2u), mid);
  M.emplace(std::make_pair(1u, 2u), side);
  return make_model(cse, H, std::move(M));
}

// --- (2,3,6), n = 4, k = 1 ----------------------------------------------

// The five admissible classes are chain truncations: diagonal 6 with
// 2ζ−4 on a subset of the superdiagonal slots.  Degree matrices are
// determined (M ↔ h is bijective for c = 6).
inline HForm form_236_n4(unsigned det) {
  std::vector<unsigned> bonds;
  switch (det) {
    case 144: bonds = {0, 1, 2}; break;
    case 432: bonds = {0, 1}; break;
    case 576: bonds = {0, 2}; break;
    case 864: bonds = {0}; break;
    case 1296: bonds = {}; break;
    default: throw invalid_argument_error("no canonical rank-4 form with this determinant");
  }
  std::vector<CycInt> e(16, CycInt{0, 0});
  for (unsigned i = 0; i < 4; ++i) e[i * 4 + i] = {6, 0};
  for (unsigned b : bonds) {
    e[b * 4 + (b + 1)] = {-4, 2};
    e[(b + 1) * 4 + b] = {-2, -2};
  }
  HForm H = make_hform(6, 4, e);
  if (hform_det(H) != det)
    throw invalid_argument_error("determinant mismatch in canonical form");
  return H;
}

inline CurveModel model_236_n4(unsigned det) {
  auto fam = family(make_case(2, 3, 6), form_236_n4(det));
  if (fam.size() != 1)
    throw invalid_argument_error("expected a unique degree matrix");
  return fam[0];
}

// --- (2,3,6), n = 5, k = 2 ----------------------------------------------

// The determinant-13824 form: diagonal 12, off-diagonal 4ζ+4 except for the
// entries (2,4) and (3,4), which are 6.
inline CurveModel model_236_det13824() {
  std::vector<CycInt> e(25, CycInt{0, 0});
  for (unsigned i = 0; i < 5; ++i) e[i * 5 + i] = {12, 0};
  for (unsigned i = 0; i < 5; ++i)
    for (unsigned j = i + 1; j < 5; ++j) {
      CycInt h = (i >= 2 && j == 4) ? CycInt{6, 0} : CycInt{4, 4};
      e[i * 5 + j] = h;
      e[j * 5 + i] = cyc_conj(h, 6);
    }
  HForm H = make_hform(6, 5, e);
  if (hform_det(H) != 13824)
    throw invalid_argument_error("determinant mismatch in canonical form");
  auto fam = family(make_case(2, 3, 6), H);
  if (fam.size() != 1)
    throw invalid_argument_error("expected a unique degree matrix");
  return fam[0];
}

}  // namespace curvecount::models
