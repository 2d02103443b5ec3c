#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "randlyap/circle_map.hpp"
#include "randlyap/parallel.hpp"
#include "randlyap/rng.hpp"
#include "randlyap/torus.hpp"

namespace randlyap {

enum class Letter : char { B = 'B', I = 'I', G = 'G' };
enum class GNVersion { thm1, thm2 };

struct RegionParams {
  double c = 0.005;
  double p = 0.125;
  double beta = 0.5;
  GNVersion version = GNVersion::thm2;
};

/// Radius of the B strip, sqrt(c / L).
double b_radius(const RegionParams& params, double L);

/// Throws InvalidC unless 0 < c < chat and sqrt(c/L) < c.
void require_valid_c(const RegionParams& params, const CriticalData& crit, double L);
/// Additionally requires beta in (0, 1) and c <= p / (16 M1); throws PreconditionError.
void require_region_invariants(const RegionParams& params, const CriticalData& crit, double L);

/// B for d < sqrt(c/L), I for sqrt(c/L) <= d < c, G otherwise, where d is the
/// distance from x_shifted to the critical set.
Letter classify(const CircleMap& map, const CriticalData& crit, const RegionParams& params, double x_shifted);

/// letters[i] is W_i, the letter of step i; str() writes W_{N-1} ... W_0.
struct SymbolWord {
  std::vector<Letter> letters;

  std::string str() const;
  /// Parses the written (right-to-left) form; whitespace is ignored.
  static SymbolWord parse(std::string_view written);
  std::size_t count(Letter l) const;
  std::size_t size() const { return letters.size(); }
};

/// W = G^{k_M} V_M ... G^{k_1} V_1 G^{k_0}; blocks[0] is V_1.
struct Decomposition {
  std::vector<std::size_t> g_runs;
  std::vector<SymbolWord> blocks;
};

struct GrammarReport {
  bool valid = false;
  std::optional<Decomposition> decomposition;
  std::size_t violation_index = 0;  // W index of the first offending letter
  std::string reason;
};

/// Letter sequence of the first omegas.size() steps from q0.
SymbolWord extract_word(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                        const std::vector<double>& omegas, TorusPoint q0);

GrammarReport validate_grammar(const SymbolWord& w);

/// True iff a maximal non-G block (written form) is one of B, BB, BI^kB, I^kB, I^k, BI^k.
bool admissible_block(std::string_view written);

struct TwoStepReport {
  std::size_t violations = 0;
  std::size_t tested = 0;
};

/// Samples (x0, y0, w1, w2, w3) uniformly conditioned on step 0 in B or I and
/// step 1 in B, and counts step-2 letters other than G.
TwoStepReport check_lemma_5_3(const CircleMap& map, const CriticalData& crit, const RegionParams& params, double c0,
                              double eps, std::size_t n_samples, std::uint64_t seed, Exec exec = Exec::parallel);

enum class GNCondition { none, a_i, a_ii, b_first, b_last };
std::string to_string(GNCondition c);

struct GNReport {
  bool member = false;
  GNCondition failed = GNCondition::none;
  std::size_t index = 0;
};

/// Membership of q0 in G_N for the noise block. thm2 needs N + 1 noise values.
GNReport in_G_N(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                const std::vector<double>& omegas, TorusPoint q0, std::size_t N);

struct GNSample {
  TorusPoint q0;
  std::vector<double> omegas;
  std::size_t tries = 0;
};

/// Rejection-samples a uniform (q0, omegas) conditioned on G_N membership.
std::optional<GNSample> sample_G_N(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                                   double eps, std::size_t N, Stream& s, std::size_t max_tries = 100000);

/// Monte Carlo estimate of Leb(G_N^c), averaged over uniform noise blocks.
double gn_complement_fraction(const CircleMap& map, const CriticalData& crit, const RegionParams& params, double eps,
                              std::size_t N, std::size_t n_samples, std::uint64_t seed, Exec exec = Exec::parallel);

struct GrammarCheck {
  std::size_t tested = 0;
  std::size_t violations = 0;
  std::size_t nontrivial = 0;  // words with at least one non-G block
  std::string first_violation;
  std::map<std::string, std::size_t> block_counts;
};

/// Extracts words of G_N-conditioned orbits (thm2) and validates each one.
GrammarCheck check_grammar(const CircleMap& map, const CriticalData& crit, const RegionParams& params, double eps,
                           std::size_t N, std::size_t n_orbits, std::uint64_t seed, Exec exec = Exec::parallel);

/// Cone of vectors with |slope| <= s.
struct Cone {
  double s = 1.0;
};

struct CanonicalCones {
  Cone narrow;  // L^{-1 + beta/4}
  Cone unit;    // 1
  Cone wide;    // L^{1 - beta/4}
};

CanonicalCones canonical_cones(double L, double beta);

/// Slope bound of the image of C(s) under [[f'(x), -1], [1, 0]], i.e. 1/(|f'| - s).
/// Throws ConeNotMapped when |f'| <= s, or |f'| <= s + 1/target.s when a target is given.
Cone cone_map(const CircleMap& map, double x_shifted, Cone cone_in, std::optional<Cone> target = std::nullopt);

/// M(C(in)) subset of C(out): boundary-ray images inside the target with no
/// wrap through the vertical, plus `interior_rays` interior rays.
bool cone_contains(const Jacobian2& M, Cone in, Cone out, int interior_rays = 32);

/// min |M u| over unit u in the cone (exact for 2x2).
double cone_min_growth(const Jacobian2& M, Cone cone);

enum class WordCase { a, b, c, d, e, f };
std::string to_string(WordCase c);
std::optional<WordCase> parse_word_case(std::string_view s);
/// Written form of the case word: I, B, BB, BI, IB, BIB.
std::string case_word(WordCase c);

struct WordLemmaReport {
  WordCase word_case = WordCase::a;
  std::size_t tested = 0;
  std::size_t attempts = 0;
  std::size_t containment_violations = 0;
  std::size_t growth_violations = 0;
  std::size_t prop_violations = 0;     // forward C_n -> C_w with growth >= 1/2 L^{(beta/5) n_I}
  std::size_t adjoint_violations = 0;  // transpose maps C_n into C_w
  double min_growth_observed = 0.0;
  double growth_bound = 0.0;
  double prop_bound = 0.0;
  std::size_t subcase_I = 0;   // BIB with |f'(x3)| >= |f'(x1)|
  std::size_t subcase_II = 0;
  bool unrealizable = false;

  std::size_t total_violations() const {
    return containment_violations + growth_violations + prop_violations + adjoint_violations;
  }
};

/// Samples configurations realizing the case word under the G_N side
/// conditions (a)(i) per letter and (a)(ii) between consecutive letters, and
/// checks the cone relation and growth bound of that case.
WordLemmaReport verify_word_lemmas(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                                   WordCase word_case, std::size_t n_samples, std::uint64_t seed,
                                   Exec exec = Exec::parallel, std::size_t max_tries = 100000000);

/// Single step from a G point: C_w is mapped into C_n with growth >= 1/4 L^{beta/4}.
/// Uses the containment and growth fields of the report.
WordLemmaReport verify_good_step(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                                 std::size_t n_samples, std::uint64_t seed, Exec exec = Exec::parallel);

struct PropertyBReport {
  bool sigma1_ok = false;
  bool angle_ok = false;
  double log_sigma1 = 0.0;
  double log_sigma1_bound = 0.0;
  double theta_minus_0 = 0.0;
  double theta_minus_N = 0.0;
  double angle_bound = 0.0;
  double growth_exponent = 0.0;  // log sigma1 / (N log L)
};

/// Checks the block singular value and contracted-direction bounds on a G_N (thm2) block.
PropertyBReport verify_property_B(const CircleMap& map, const CriticalData& crit, const RegionParams& params,
                                  const std::vector<double>& omegas, TorusPoint q0, std::size_t N);

}  // namespace randlyap
