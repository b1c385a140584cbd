#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cslope/classify.hpp"
#include "cslope/graphcore.hpp"
#include "cslope/solutions.hpp"

namespace cslope {

/// `laps` equal-width affine laps on [x0, x1] with alternating orientation, all onto the
/// same image; the first lap runs from y0 to y1.
struct Piece {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  Count laps = 1;
  bool increasing() const { return y1 > y0; }
  double image_lo() const { return std::min(y0, y1); }
  double image_hi() const { return std::max(y0, y1); }
  double slope() const { return (y1 - y0) * to_double(laps) / (x1 - x0); }
  /// Lap k as a single piece.
  Piece lap(Index k) const;
};

struct Element {
  double lo = 0.0, hi = 0.0;
  std::vector<Piece> pieces;
  bool pieces_truncated = false;  // infinitely many pieces; only the first ones are listed
  bool monotone() const { return pieces.size() == 1 && !pieces_truncated; }
};

/// A tail family of elements accumulating at `point`; from_right when the elements sit to its right.
/// side: +1 for labels past the positive end, -1 for labels past the negative end (Z).
struct TailEnd {
  double point = 0.0;
  bool from_right = true;
  int side = 1;
};

enum class MapKind { finite, dyadic_tent, ruette, bt12, kmap };
std::string map_kind_name(MapKind k);

/// Countable piecewise-affine Markov map: a base family generator plus an explicit
/// block of labels [block_lo, block_hi] that overrides it. Labels above the block map
/// to base index label - shift; labels below the block are base indices.
class MarkovMap {
 public:
  static MarkovMap finite(std::vector<Element> elements);
  /// Dyadic tent partition i_n = [2^-(n+1), 2^-n]; a_n alternating pieces on i_n (a = const1: the tent map).
  static MarkovMap dyadic_tent(const IntSequence& a = IntSequence::constant(1));
  static MarkovMap ruette(const IntSequence& a);
  /// p_k = [w_k, w_{k-1}] (label k - 1), increasing onto [0, w_{k-2}]; needs lambda >= 4.
  static MarkovMap bt12(double lambda = 4.0);
  /// Elements [b_n, b_{n+1}] on Z with b_n = 1/2 + n / (2(|n| + 1)); three laps covering n-1, n-1..n+1, n+1.
  static MarkovMap kmap();

  MapKind kind() const { return kind_; }
  const IndexSet& index_set() const { return index_set_; }
  const IntSequence& sequence() const { return seq_; }
  double lambda_param() const { return lambda_; }
  Index block_lo() const { return block_lo_; }
  Index block_hi() const { return block_hi_; }
  Index shift() const { return shift_; }
  const std::map<Index, Element>& block() const { return block_; }
  std::vector<TailEnd> tail_ends() const;
  bool leo_claimed = false;
  bool mixing_claimed = true;
  bool piecewise_continuous_only = false;
  std::vector<std::string> history;  // applied refinements / perturbations
  Index perturbations = 0;

  /// Element by label; infinite piece lists are cut after pieces reaching `depth` labels.
  Element element(Index label, std::size_t depth = 64) const;
  /// Tail matrix of the base family relabelled past the block.
  CountableMatrix base_matrix() const;

  /// Splits an element at interior points; pieces are cut where they cross a split.
  MarkovMap refine(Index label, const std::vector<double>& points) const;
  /// Splits an element at the ends of its pieces (one element per lap).
  MarkovMap refine_laps(Index label) const;

  nlohmann::json to_json() const;
  static MarkovMap from_json(const nlohmann::json& j);
  bool operator==(const MarkovMap& o) const { return to_json() == o.to_json(); }

 private:
  friend MarkovMap window_perturb_local(const MarkovMap&, Index, int);
  friend MarkovMap window_perturb_global(const MarkovMap&, const IntSequence&);
  MarkovMap() = default;
  Element base_element(Index n, std::size_t depth) const;
  void materialize(Index label);

  MapKind kind_ = MapKind::finite;
  IndexSet index_set_;
  IntSequence seq_ = IntSequence::constant(1);
  double lambda_ = 0.0;
  std::vector<Element> finite_;
  std::map<Index, Element> block_;
  Index block_lo_ = 0, block_hi_ = -1, shift_ = 0;
};

/// Piece-image cover count for one piece against one element (1e-9 relative tolerance).
/// Throws std::domain_error on a partial cover.
int covers(const Piece& p, const Element& e);

/// m_ij = number of pieces on element i covering element j, computed on a window and
/// checked against the relabelled tail rule on a wider band.
CountableMatrix transition_matrix(const MarkovMap& map, std::size_t window = 64);

MarkovMap window_perturb_local(const MarkovMap& map, Index label, int k);
/// assignments: label -> order; centralized_window: every perturbed element inside [a, b].
MarkovMap window_perturb_global(const MarkovMap& map, const std::map<Index, int>& assignments,
                                std::optional<std::pair<double, double>> centralized_window = {});
/// Tail-rule assignment on the dyadic tent: a_n = 2k_n + 1 alternating pieces on every i_n, n >= 1.
MarkovMap window_perturb_global(const MarkovMap& map, const IntSequence& multipliers);

/// Same lap convention as Piece.
struct Branch {
  Index element = 0;
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  Count laps = 1;
  double slope() const { return (y1 - y0) * to_double(laps) / (x1 - x0); }
};
struct ConstantSlopeMap {
  double lambda = 0.0;
  std::vector<Index> labels;
  std::vector<std::pair<double, double>> elements;  // same order as labels
  std::vector<Branch> branches;
  bool truncated = false;
  double max_slope_deviation = 0.0;  // max | |slope| / lambda - 1 |
  bool matrix_preserved = false;
  std::string source;
  nlohmann::json to_json() const;
};

/// Requires a verified summable lambda-solution; builds the conjugate map of constant slope on a window.
ConstantSlopeMap linearize(const MarkovMap& map, const LambdaSolution& v, std::size_t window = 40, double tol = 1e-8);

struct LeoReport {
  std::vector<Index> reached;      // labels whose image reaches [0, 1]
  std::vector<Index> not_reached;
  std::map<Index, int> steps;
  bool leo_evidence = false;
};
LeoReport leo_probe(const MarkovMap& map, int depth, std::size_t window = 24);

/// (x, T(x)) samples plus the branch ends in view.
std::vector<std::pair<double, double>> sample(const MarkovMap& map, std::size_t n_points, std::size_t window = 32);
std::vector<std::pair<double, double>> sample(const ConstantSlopeMap& map, std::size_t n_points);

enum class Advice { linearizable_certified, linearizable_after_perturbation, not_linearizable_certified, unknown };
std::string advice_name(Advice a);
struct Recommendation {
  Advice advice = Advice::unknown;
  std::string rule;
  std::optional<int> suggested_order;
  std::vector<std::string> notes;
};
struct AdvisorInput {
  CountableMatrix matrix;
  Index base = 0;
  std::optional<FamilyDescriptor> family;
  VereJonesVerdict verdict;
  Tri leo = Tri::unknown;
  bool perturbed = false;
};
Recommendation linearizability_advisor(const AdvisorInput& in);

/// Same verdict before and after refining `label` of the map (classification on the base index).
struct InvarianceReport {
  VereJonesVerdict before, after;
  bool same = false;
};
InvarianceReport partition_invariance_check(const MarkovMap& map, Index label, const std::vector<double>& points,
                                            const ClassifyOptions& opt = {});

// ---------------------------------------------------------------- gallery

struct ExpectedResult {
  std::optional<VJClass> cls;
  std::string entropy;  // "log 4", "log(1+√3)"
  double lambda = 0.0;
  std::optional<Surd> lambda_exact;
  Tri linearizable = Tri::unknown;
  std::string claim;
};
struct GalleryEntry {
  std::string name;
  std::string params;
  std::optional<MarkovMap> map;
  CountableMatrix matrix;
  std::optional<FamilyDescriptor> family;
  ExpectedResult expected;
  std::vector<Rational> exact_weights;  // bt12 w_k
  std::vector<std::string> notes;
  nlohmann::json to_json(bool with_expected) const;
};
std::vector<std::string> gallery_names();
/// params: "l=2", "lambda=4", "rule=const1", "horizon=200".
GalleryEntry gallery(const std::string& name, const std::map<std::string, std::string>& params = {});

}  // namespace cslope
