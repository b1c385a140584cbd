#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cslope/graphcore.hpp"
#include "cslope/spectral.hpp"

namespace cslope {

enum class VJClass { transient, null_recurrent, weakly_recurrent, strongly_recurrent };
enum class Confidence { exact, numeric_high, inconclusive };
enum class Tri { yes, no, unknown };

std::string class_name(VJClass c);
std::string confidence_name(Confidence c);
std::string tri_name(Tri t);

/// offset + coef * sqrt(radicand), radicand squarefree (1 for rationals).
struct Surd {
  Rational offset = 0;
  Rational coef = 0;
  Count radicand = 1;

  static Surd rational(const Rational& r) { return Surd{r, 0, 1}; }
  /// coef * sqrt(r) with the square part pulled out.
  static Surd root(const Rational& coef, const Rational& r);
  Surd affine(const Rational& k, const Rational& l) const { return Surd{k * offset + l, k * coef, radicand}; }
  double value() const;
  std::string text() const;
};

struct VerdictEvidence {
  std::optional<SeriesEval> F_at_R;
  std::optional<SeriesEval> Fprime_at_R;
  double R = 0.0;
  double Phi = 0.0;
  double limit_m_R_n = 0.0;  // m_jj(N) R^N at the end of the table
  bool limit_zero = false;   // limit treated as zero
  std::optional<double> F_exact;  // closed-form F_jj(R) when known
  std::vector<std::string> notes;
};

struct VereJonesVerdict {
  std::optional<VJClass> cls;  // empty when inconclusive
  Confidence confidence = Confidence::inconclusive;
  double lambda = 0.0;
  std::optional<Surd> lambda_exact;
  Tri summable = Tri::unknown;  // summable lambda_M-solution exists
  std::string summable_reason;
  std::string method;
  VerdictEvidence evidence;
};

struct FamilyDescriptor {
  std::string name;  // banded_z, boundary_n, affine, tent_sequence, ruette_sequence, bt12, bosou_factor
  std::vector<Count> params;
  std::optional<IntSequence> sequence;
  std::shared_ptr<FamilyDescriptor> inner;  // affine only

  /// "banded_z:1,1", "boundary_n:1,1,3", "affine:2,1,banded_z:1,1", "tent_sequence:A2",
  /// "ruette_sequence:pow2", "bt12", "bosou_factor".
  static FamilyDescriptor parse(const std::string& text);
  std::string text() const;
  CountableMatrix matrix() const;
};

struct ClassifyOptions {
  Index horizon = 400;
  double tol = 1e-3;
  std::vector<std::size_t> schedule = default_schedule();
};

VereJonesVerdict classify_numeric(const CountableMatrix& m, Index j = 0, const ClassifyOptions& opt = {});
/// Throws std::invalid_argument for unknown families or parameters outside the domain.
VereJonesVerdict classify_closed_form(const FamilyDescriptor& fam);

/// True when a confident numeric verdict disagrees with a confident closed form.
bool contradicts(const VereJonesVerdict& a, const VereJonesVerdict& b);

struct SalamaReport {
  double h_full = 0.0;  // log spectral radius of the N-truncation
  double h_sub = 0.0;   // same with the base vertex removed
  bool sub_equal = false;
  bool self_embedding = false;  // deleting the base row/column reproduces the descriptor
  std::string note;
};
SalamaReport salama_test(const CountableMatrix& m, std::size_t n = 200, double tol = 1e-3);

/// Descriptor of m with row and column 0 removed and indices shifted down,
/// when the descriptor form allows it.
std::optional<CountableMatrix> drop_first(const CountableMatrix& m);

/// Root finding for the tent and Ruette generating functions.
double tent_root(const IntSequence& a);
double ruette_root(const IntSequence& a);  // via F_00(1/lambda) = 1
/// lambda = 2 + sum 2 a_n (1 - 1/lambda) lambda^{-n}
double ruette_slope_root(const IntSequence& a);

}  // namespace cslope
