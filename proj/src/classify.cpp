#include "cslope/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "cslope/paths.hpp"

namespace cslope {

namespace mp = boost::multiprecision;

std::string class_name(VJClass c) {
  switch (c) {
    case VJClass::transient: return "transient";
    case VJClass::null_recurrent: return "null_recurrent";
    case VJClass::weakly_recurrent: return "weakly_recurrent";
    case VJClass::strongly_recurrent: return "strongly_recurrent";
  }
  return "?";
}

std::string confidence_name(Confidence c) {
  switch (c) {
    case Confidence::exact: return "exact";
    case Confidence::numeric_high: return "numeric-high";
    case Confidence::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string tri_name(Tri t) { return t == Tri::yes ? "yes" : t == Tri::no ? "no" : "unknown"; }

// ---------------------------------------------------------------- surds

namespace {

std::string rational_text(const Rational& r) {
  if (mp::denominator(r) == 1) return mp::numerator(r).str();
  return mp::numerator(r).str() + "/" + mp::denominator(r).str();
}

double rational_value(const Rational& r) { return r.convert_to<double>(); }

}  // namespace

Surd Surd::root(const Rational& coef, const Rational& r) {
  if (r < 0) throw std::domain_error("square root of a negative number");
  if (r == 0 || coef == 0) return rational(0);
  // sqrt(p/q) = sqrt(p q) / q
  Count q = mp::denominator(r);
  Count n = mp::numerator(r) * q;
  Count square = 1, rest = 1;
  for (Count d = 2; d * d <= n; ++d) {
    while (n % (d * d) == 0) {
      n /= d * d;
      square *= d;
    }
    if (n % d == 0) {
      n /= d;
      rest *= d;
    }
  }
  rest *= n;
  Surd s;
  s.coef = coef * Rational(square, q);
  s.radicand = rest;
  if (s.radicand == 1) return rational(s.coef);
  return s;
}

double Surd::value() const {
  return rational_value(offset) + rational_value(coef) * std::sqrt(radicand.convert_to<double>());
}

std::string Surd::text() const {
  if (coef == 0 || radicand == 1) return rational_text(offset + coef * Rational(radicand));
  std::string term;
  Count p = mp::abs(mp::numerator(coef)), q = mp::denominator(coef);
  std::string root = "√" + radicand.str();
  if (q == radicand) term = p.str() + "/" + root;
  else if (q == 1) term = (p == 1 ? "" : p.str()) + root;
  else term = (p == 1 ? "" : p.str()) + root + "/" + q.str();
  std::string sign = coef < 0 ? "-" : "";
  if (offset == 0) return sign + term;
  return rational_text(offset) + (coef < 0 ? "-" : "+") + term;
}

// ---------------------------------------------------------------- families

FamilyDescriptor FamilyDescriptor::parse(const std::string& text) {
  FamilyDescriptor f;
  auto colon = text.find(':');
  f.name = text.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto ints = [&](std::string s, std::size_t want) {
    std::vector<Count> out;
    std::size_t pos = 0;
    while (out.size() < want) {
      auto comma = s.find(',', pos);
      std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument(fmt::format("family '{}': expected {} positive integers", text, want));
      out.emplace_back(tok);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (out.size() != want) throw std::invalid_argument(fmt::format("family '{}': expected {} parameters", text, want));
    return std::pair{out, pos};
  };
  if (f.name == "banded_z") {
    f.params = ints(rest, 2).first;
  } else if (f.name == "boundary_n") {
    f.params = ints(rest, 3).first;
  } else if (f.name == "affine") {
    std::size_t c1 = rest.find(','), c2 = c1 == std::string::npos ? c1 : rest.find(',', c1 + 1);
    if (c2 == std::string::npos) throw std::invalid_argument("affine needs k,l,inner");
    f.params = ints(rest.substr(0, c2), 2).first;
    f.inner = std::make_shared<FamilyDescriptor>(parse(rest.substr(c2 + 1)));
  } else if (f.name == "tent_sequence" || f.name == "ruette_sequence") {
    f.sequence = IntSequence::parse(rest);
  } else if (f.name == "bt12" || f.name == "bosou_factor") {
    if (!rest.empty()) throw std::invalid_argument(f.name + " takes no parameters");
  } else {
    throw std::invalid_argument("unknown family '" + f.name + "'; use numeric classification on a matrix descriptor");
  }
  for (const auto& p : f.params)
    if (p < 1 && f.name != "affine") throw std::invalid_argument("family parameters must be positive");
  return f;
}

std::string FamilyDescriptor::text() const {
  std::string out = name;
  if (name == "affine") return fmt::format("affine:{},{},{}", params[0].str(), params[1].str(), inner->text());
  if (sequence) return name + ":" + sequence->describe();
  for (std::size_t k = 0; k < params.size(); ++k) out += (k ? "," : ":") + params[k].str();
  return out;
}

CountableMatrix FamilyDescriptor::matrix() const {
  if (name == "banded_z") return banded_z(params[0], params[1]);
  if (name == "boundary_n") return boundary_n(params[0], params[1], params[2]);
  if (name == "affine") return affine_transform(inner->matrix(), params[0], params[1]);
  if (name == "tent_sequence") return tent_perturbation(*sequence);
  if (name == "ruette_sequence") return ruette_matrix(*sequence);
  if (name == "bt12") return bt12_matrix();
  if (name == "bosou_factor") return bosou_matrix();
  throw std::invalid_argument("unknown family '" + name + "'");
}

// ---------------------------------------------------------------- generating functions

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// F(z) = sum_{n>=1} a_1...a_{n-1} z^n for a tent sequence, for z below 1/limsup a_n.
double tent_F(const IntSequence& a, double z) {
  if (auto ec = a.eventually_constant()) {
    auto [n0, c] = *ec;
    double cz = to_double(c) * z;
    if (cz >= 1.0) return INFINITY;
    double sum = 0.0, p = 1.0, zn = 1.0;
    for (Index n = 1; n <= n0; ++n) {
      zn *= z;
      sum += p * zn;
      if (n < n0) p *= a.at_double(n);
    }
    // p = a_1 ... a_{n0-1}; later terms pick up a factor c z each
    return sum + p * zn * cz / (1.0 - cz);
  }
  // bounded but not eventually constant: geometric tail with ratio sup * z
  double sup = to_double(a.sup()), q = sup * z;
  if (q >= 1.0) throw std::domain_error("tent series outside the certified region");
  double sum = 0.0, lp = 0.0;
  for (Index n = 1;; ++n) {
    double term = std::exp(lp + n * std::log(z));
    sum += term;
    if (term * q / (1.0 - q) <= 1e-17 * sum) return sum + term * q / (1.0 - q);
    lp += std::log(a.at_double(n));
  }
}

double ruette_F(const IntSequence& a, double z) {
  if (a.kind() == IntSequence::Kind::power) {
    double p = to_double(a.value());
    if (p * z >= 1.0 || z >= 1.0) return INFINITY;
    return z + z * z / (1.0 - z) + 2.0 * p * z * z / (1.0 - p * z);
  }
  if (z >= 1.0) return INFINITY;
  double sup = to_double(a.sup());
  double sum = z, zk = z;
  for (Index k = 1;; ++k) {
    zk *= z;
    sum += (1.0 + 2.0 * a.at_double(k)) * zk;
    double tail = (1.0 + 2.0 * sup) * zk * z / (1.0 - z);
    if (tail <= 1e-17 * sum) return sum + tail;
  }
}

double root_of_F(const std::function<double(double)>& F, double hi) {
  return bisect([&](double z) { return F(z) - 1.0; }, 0.0, hi, 1e-16);
}

VereJonesVerdict exact(VJClass c, double lambda, std::optional<Surd> sym, std::string method) {
  VereJonesVerdict v;
  v.cls = c;
  v.confidence = Confidence::exact;
  v.lambda = sym ? sym->value() : lambda;
  v.lambda_exact = std::move(sym);
  v.method = std::move(method);
  v.evidence.R = 1.0 / v.lambda;
  return v;
}

}  // namespace

double tent_root(const IntSequence& a) {
  if (!a.bounded()) throw std::domain_error("unbounded tent sequence: infinite entropy");
  double hi = 1.0 / to_double(a.sup());
  if (auto ec = a.eventually_constant()) hi = 1.0 / to_double(ec->second);
  double top = a.eventually_constant() ? hi : std::nextafter(hi, 0.0);
  if (tent_F(a, top) < 1.0) throw std::domain_error("tent generating function stays below 1");
  return 1.0 / root_of_F([&](double z) { return tent_F(a, z); }, top);
}

double ruette_root(const IntSequence& a) {
  double hi = 0.5;  // F(1/2) >= 1 for every sequence
  if (a.kind() == IntSequence::Kind::power) hi = std::min(hi, 1.0 / to_double(a.value()));
  return 1.0 / root_of_F([&](double z) { return ruette_F(a, z); }, hi);
}

double ruette_slope_root(const IntSequence& a) {
  auto h = [&](double lam) {
    double s = 0.0;
    if (a.kind() == IntSequence::Kind::power) {
      double r = to_double(a.value()) / lam;
      if (r >= 1.0) return -std::numeric_limits<double>::infinity();
      s = 2.0 * r / (1.0 - r);
    } else {
      double w = 1.0, sup = to_double(a.sup());
      for (Index n = 1;; ++n) {
        w /= lam;
        s += 2.0 * a.at_double(n) * w;
        if (2.0 * sup * w / (lam - 1.0) < 1e-17) break;
      }
    }
    return lam - 2.0 - s * (1.0 - 1.0 / lam);
  };
  // h(2) <= 0 for every nonnegative sequence
  double lo = a.kind() == IntSequence::Kind::power ? std::max(2.0, to_double(a.value()) * (1 + 1e-15)) : 2.0;
  double hi = std::max(4.0, 2 * lo);
  while (h(hi) < 0) hi *= 2;
  return bisect(h, lo, hi, 1e-16);
}

// ---------------------------------------------------------------- closed forms

namespace {

Rational pow_rational(const Rational& q, unsigned n) {
  Rational r = 1;
  for (unsigned k = 0; k < n; ++k) r *= q;
  return r;
}

// (1/o) sum_{m>=0} q^{u(m)}, u counting B(1) members <= m, q = inside/outside.
// Members up to 9 are 1..4; block k >= 2 adds 3^k+1 and 3^k+2.
std::optional<Rational> b1_F_at_phi(const Rational& q, const Rational& o) {
  if (3 * q * q >= 1) return std::nullopt;
  Rational head = 1 + q + q * q + pow_rational(q, 3) + 6 * pow_rational(q, 4);
  Rational blocks = pow_rational(q, 5) / (1 - q * q) + 18 * pow_rational(q, 6) / (1 - 3 * q * q) -
                    pow_rational(q, 6) / (1 - q * q);
  return (head + blocks) / o;
}

VereJonesVerdict tent_closed_form(const IntSequence& a) {
  if (!a.all_odd_positive()) throw std::invalid_argument("tent sequence must be odd and positive");
  if (!a.bounded()) throw std::invalid_argument("unbounded tent sequence has infinite entropy");
  if (auto ec = a.eventually_constant()) {
    double lam = tent_root(a);
    std::optional<Surd> sym;
    if (a.kind() == IntSequence::Kind::constant) sym = Surd::rational(Rational(a.value() + 1));
    auto v = exact(VJClass::strongly_recurrent, lam, sym, "tent generating function, F(Phi) = infinity");
    v.evidence.Phi = 1.0 / to_double(ec->second);
    v.evidence.F_exact = 1.0;
    v.summable = Tri::yes;
    v.summable_reason = "leo map: every lambda-solution is summable";
    return v;
  }
  if (a.kind() == IntSequence::Kind::indicator && a.units().kind == UnitSet::Kind::b1 && a.inside() < a.outside()) {
    Rational o(a.outside()), q(a.inside(), a.outside());
    auto F = b1_F_at_phi(q, o);
    if (F && *F < 1) {
      auto v = exact(VJClass::transient, 0, Surd::rational(o), "B(1) block sums, F(Phi) < 1");
      v.evidence.Phi = v.evidence.R;
      v.evidence.F_exact = rational_value(*F);
      v.evidence.notes.push_back("F(Phi) = " + rational_text(*F));
      v.summable = Tri::no;
      v.summable_reason = "transient: no lambda-solution exists";
      return v;
    }
    if (F && *F == 1) {
      bool divergent = 9 * q * q >= 1;
      auto v = exact(divergent ? VJClass::null_recurrent : VJClass::weakly_recurrent, 0, Surd::rational(o),
                     "B(1) block sums, F(Phi) = 1");
      v.evidence.Phi = v.evidence.R;
      v.evidence.F_exact = 1.0;
      return v;
    }
    auto v = exact(VJClass::strongly_recurrent, tent_root(a), std::nullopt, "B(1) block sums, F(Phi) > 1");
    v.evidence.Phi = 1.0 / to_double(a.outside());
    v.evidence.F_exact = 1.0;
    v.summable = Tri::yes;
    v.summable_reason = "leo map: every lambda-solution is summable";
    return v;
  }
  throw std::invalid_argument("no closed form for tent sequence " + a.describe() + "; use numeric classification");
}

VereJonesVerdict ruette_closed_form(const IntSequence& a) {
  for (Index n = 1; n <= 8; ++n)
    if (a.at(n) < 0) throw std::invalid_argument("ruette sequence must be nonnegative");
  double lam = ruette_root(a);
  std::optional<Surd> sym;
  if (a.kind() == IntSequence::Kind::constant) sym = Surd::root(1, Rational(1 + 2 * a.value())).affine(1, 1);
  auto v = exact(VJClass::strongly_recurrent, lam, sym, "");
  v.evidence.F_exact = 1.0;
  if (a.bounded() || a.value() == 1) {
    v.method = "bounded row: Phi = 1 > 1/2 >= R";
    v.evidence.Phi = 1.0;
  } else {
    v.method = "F(1/a) = infinity so R < Phi = 1/a";
    v.evidence.Phi = 1.0 / to_double(a.value());
  }
  v.summable = Tri::yes;
  v.summable_reason = "partition lengths lambda^-n (1 - 1/lambda)";
  return v;
}

}  // namespace

VereJonesVerdict classify_closed_form(const FamilyDescriptor& fam) {
  const auto& p = fam.params;
  if (fam.name == "banded_z") {
    auto v = exact(VJClass::null_recurrent, 0, Surd::root(2, Rational(p[0] * p[1])), "banded characteristic roots");
    v.evidence.Phi = v.evidence.R;
    v.evidence.F_exact = 1.0;
    v.summable = Tri::no;
    v.summable_reason = "two-sided banded solutions are never summable";
    return v;
  }
  if (fam.name == "boundary_n") {
    const Count &a = p[0], &b = p[1], &c = p[2];
    Surd two_root = Surd::root(2, Rational(a * b));
    VereJonesVerdict v;
    if (2 * b > c) {
      v = exact(VJClass::transient, 0, two_root, "boundary entry c < 2b");
      v.evidence.F_exact = rational_value(Rational(c, 2 * b));
      v.summable = a < b ? Tri::yes : Tri::no;
      v.summable_reason = a < b ? "a < b" : "a >= b";
    } else if (2 * b == c) {
      v = exact(VJClass::null_recurrent, 0, two_root, "boundary entry c = 2b");
      v.evidence.F_exact = 1.0;
      v.summable = a < b ? Tri::yes : Tri::no;
      v.summable_reason = a < b ? "a < b" : "a >= b";
    } else {
      v = exact(VJClass::strongly_recurrent, 0, Surd::root(Rational(c), Rational(a, c - b)), "boundary entry c > 2b");
      v.evidence.F_exact = 1.0;
      v.summable = a + b < c ? Tri::yes : Tri::no;
      v.summable_reason = a + b < c ? "a + b < c" : "a + b >= c";
    }
    v.evidence.Phi = 1.0 / two_root.value();
    return v;
  }
  if (fam.name == "affine") {
    if (!fam.inner) throw std::invalid_argument("affine family without an inner family");
    if (p[0] < 1) throw std::invalid_argument("affine factor k must be positive");
    if (!fam.inner->matrix().finite_rows()) throw std::invalid_argument("affine rule needs a finite-row inner matrix");
    auto in = classify_closed_form(*fam.inner);
    auto v = in;
    Rational k(p[0]), l(p[1]);
    if (in.lambda_exact) v.lambda_exact = in.lambda_exact->affine(k, l);
    v.lambda = v.lambda_exact ? v.lambda_exact->value() : to_double(p[0]) * in.lambda + to_double(p[1]);
    v.method = "affine image of " + fam.inner->text() + " (" + in.method + ")";
    v.evidence.R = 1.0 / v.lambda;
    v.evidence.Phi = kNaN;
    v.evidence.notes.push_back("lambda-solutions coincide with those of the inner matrix");
    return v;
  }
  if (fam.name == "tent_sequence") return tent_closed_form(*fam.sequence);
  if (fam.name == "ruette_sequence") return ruette_closed_form(*fam.sequence);
  if (fam.name == "bt12" || fam.name == "bosou_factor") {
    bool bt = fam.name == "bt12";
    auto v = exact(VJClass::transient, 0, Surd::rational(bt ? 4 : 9), "self-embedding: dropping the first row gives the same matrix");
    v.evidence.Phi = kNaN;
    v.summable = Tri::yes;
    v.summable_reason = "explicit positive summable solution for every lambda >= lambda_M";
    return v;
  }
  throw std::invalid_argument("unknown family '" + fam.name + "'; use numeric classification");
}

// ---------------------------------------------------------------- numeric

namespace {

struct PowerTail {
  std::optional<double> bound;
  double exponent = 0.0;
};

// Terms behave like C n^e on a lattice of step d; the sum past n_last is
// about t_last n_last / (d (-e-1)).
PowerTail power_tail(double t_last, double n_last, double e, std::size_t d) {
  PowerTail t;
  t.exponent = e;
  if (e < -1.0) t.bound = t_last * n_last / (static_cast<double>(d) * (-e - 1.0));
  return t;
}

}  // namespace

VereJonesVerdict classify_numeric(const CountableMatrix& m, Index j, const ClassifyOptions& opt) {
  VereJonesVerdict v;
  v.method = "numeric";
  auto& ev = v.evidence;
  auto sp = perron_value(m, opt.schedule);
  v.lambda = sp.lambda_estimate;
  double R = sp.R_estimate;
  if (!sp.converged) ev.notes.push_back("truncated spectral radii still moving at the end of the schedule");

  auto f = first_entrance(m, j, j, opt.horizon).values;
  auto mm = power_counts(m, j, j, opt.horizon).values;

  std::optional<GrowthFit> fit;
  double Phi = INFINITY;
  try {
    fit = growth_rate(f, std::nullopt, true);
    Phi = 1.0 / fit->growth;
  } catch (const std::domain_error& e) {
    ev.notes.push_back(std::string("f-table: ") + e.what());
  }
  ev.Phi = Phi;
  ev.R = R;

  // m_jj(n) R^n near the end of the table
  auto last_on_lattice = [&](const std::vector<Count>& c, std::size_t upto) -> std::optional<std::size_t> {
    for (std::size_t n = std::min(upto, c.size() - 1); n > 0; --n)
      if (c[n] > 0) return n;
    return std::nullopt;
  };

  auto finish_limit = [&](double z) {
    auto n1 = last_on_lattice(mm, mm.size() - 1), n0 = last_on_lattice(mm, (mm.size() - 1) / 2);
    if (n1 && n0) {
      double a1 = scaled(mm[*n1], z, static_cast<Index>(*n1)), a0 = scaled(mm[*n0], z, static_cast<Index>(*n0));
      ev.limit_m_R_n = a1;
      ev.limit_zero = a1 < 0.9 * a0;
    }
  };

  // (1) R < Phi
  if (R < Phi * (1.0 - opt.tol)) {
    v.cls = VJClass::strongly_recurrent;
    v.confidence = Confidence::numeric_high;
    double hi = R;
    auto g = [&](double z) {
      auto s = series_eval(f, z);
      return (s.tail_bound ? *s.total() : s.value_partial) - 1.0;
    };
    auto at_hi = series_eval(f, hi);
    if (at_hi.tail_bound && *at_hi.total() >= 1.0) {
      double z = bisect(g, 0.0, hi, 1e-15);
      v.lambda = 1.0 / z;
      ev.R = z;
      ev.notes.push_back("lambda refined from F(R) = 1");
    }
    ev.F_at_R = series_eval(f, ev.R);
    ev.Fprime_at_R = derivative_series_eval(f, ev.R);
    finish_limit(ev.R);
    return v;
  }
  if (!fit) {
    v.cls.reset();
    v.confidence = Confidence::inconclusive;
    ev.notes.push_back("no growth estimate for the f-table");
    return v;
  }

  // (2) R = Phi: inspect F(Phi) and F'(Phi) with a power-law tail
  double z = Phi;
  ev.R = z;
  v.lambda = fit->growth;
  auto n_last = last_on_lattice(f, f.size() - 1);
  double t_last = scaled(f[*n_last], z, static_cast<Index>(*n_last));
  double nl = static_cast<double>(*n_last);
  double gamma = fit->gamma;
  ev.notes.push_back(fmt::format("f(n) Phi^n ~ n^{:.4g}, fit residual {:.3g}", gamma, fit->residual));

  auto Ftail = power_tail(t_last, nl, gamma, fit->period);
  auto Fd_tail = power_tail(t_last * nl, nl, gamma + 1.0, fit->period);
  SeriesEval F = Ftail.bound ? series_eval(f, z, TailModel::declared, Ftail.bound) : series_eval(f, z, TailModel::none);
  F.tail_note = Ftail.bound ? "power-law tail" : "power-law terms not summable";
  SeriesEval Fd = Fd_tail.bound ? derivative_series_eval(f, z, TailModel::declared, Fd_tail.bound)
                                : derivative_series_eval(f, z, TailModel::none);
  Fd.tail_note = Fd_tail.bound ? "power-law tail" : "power-law terms not summable";
  ev.F_at_R = F;
  ev.Fprime_at_R = Fd;
  finish_limit(z);

  const double margin = 0.25;
  if (fit->residual > 0.1) {
    ev.notes.push_back("f-table too irregular for a power-law tail");
    return v;
  }
  if (gamma > -1.0 + margin) {
    // non-decaying terms: divergence is only credible once the partial sum passes 1
    if (F.value_partial > 1.0 + opt.tol) {
      v.cls = VJClass::strongly_recurrent;
      v.confidence = Confidence::numeric_high;
      ev.notes.push_back("F exceeds 1 at Phi, so R < Phi");
    } else {
      ev.notes.push_back("terms do not decay on the fit window but the partial sum is below 1");
    }
    return v;
  }
  if (!Ftail.bound || gamma > -1.0 - margin) {
    ev.notes.push_back("tail exponent too close to -1");
    return v;
  }
  double total = *F.total();
  double tolF = opt.tol + 0.1 * *Ftail.bound;
  if (total > 1.0 + tolF) {
    v.cls = VJClass::strongly_recurrent;
    v.confidence = Confidence::numeric_high;
  } else if (total < 1.0 - tolF) {
    v.cls = VJClass::transient;
    v.confidence = Confidence::numeric_high;
  } else if (gamma + 1.0 > -1.0 + margin) {
    v.cls = VJClass::null_recurrent;
    v.confidence = Confidence::numeric_high;
  } else if (gamma + 1.0 < -1.0 - margin) {
    v.cls = VJClass::weakly_recurrent;
    v.confidence = Confidence::numeric_high;
  } else {
    ev.notes.push_back("F(Phi) = 1 but the F' tail exponent is too close to -1");
  }
  return v;
}

bool contradicts(const VereJonesVerdict& a, const VereJonesVerdict& b) {
  if (!a.cls || !b.cls) return false;
  if (a.confidence == Confidence::inconclusive || b.confidence == Confidence::inconclusive) return false;
  return *a.cls != *b.cls;
}

// ---------------------------------------------------------------- Salama probes

namespace {

HeadRow normalized(HeadRow h) {
  while (!h.values.empty() && h.values.back() == h.fill) h.values.pop_back();
  return h;
}

HeadRow generic_row(std::size_t k, const UpperHullRule& r) {
  HeadRow h;
  if (k > 0) {
    h.values.assign(k, 0);
    h.values[k - 1] = r.sub;
  }
  h.fill = r.upper;
  return normalized(h);
}

CountableMatrix canonical(const CountableMatrix& m) {
  CountableMatrix::Exceptional exc;
  for (const auto& [key, val] : m.exceptional())
    if (val != m.tail_entry(key.first, key.second)) exc[key] = val;
  auto* u = std::get_if<UpperHullRule>(&m.tail_rule());
  if (!u) return CountableMatrix(m.index_set(), m.tail_rule(), exc, m.shift(), m.scale(), m.diag());
  UpperHullRule r = *u;
  for (auto& h : r.head_rows) h = normalized(h);
  while (!r.head_rows.empty() && r.head_rows.back() == generic_row(r.head_rows.size() - 1, r)) r.head_rows.pop_back();
  return CountableMatrix(m.index_set(), r, exc, m.shift(), m.scale(), m.diag());
}

}  // namespace

std::optional<CountableMatrix> drop_first(const CountableMatrix& m) {
  if (m.index_set() != IndexSet::natural()) return std::nullopt;
  CountableMatrix::Exceptional exc;
  for (const auto& [key, val] : m.exceptional())
    if (key.first > 0 && key.second > 0) exc[{key.first - 1, key.second - 1}] = val;
  if (m.shift() > 0)
    return CountableMatrix(m.index_set(), m.tail_rule(), exc, m.shift() - 1, m.scale(), m.diag());
  TailRule rule = m.tail_rule();
  if (std::holds_alternative<UpperHullRule>(rule)) {
    auto r = std::get<UpperHullRule>(canonical(m).tail_rule());
    std::vector<HeadRow> heads;
    for (std::size_t k = 1; k < r.head_rows.size(); ++k) {
      HeadRow h = r.head_rows[k];
      if (!h.values.empty()) h.values.erase(h.values.begin());
      heads.push_back(h);
    }
    r.head_rows = heads;
    rule = r;
  } else if (!std::holds_alternative<BandedRule>(rule) && !std::holds_alternative<ZeroRule>(rule)) {
    return std::nullopt;
  }
  return CountableMatrix(m.index_set(), rule, exc, 0, m.scale(), m.diag());
}

SalamaReport salama_test(const CountableMatrix& m, std::size_t n, double tol) {
  SalamaReport r;
  auto full = m.index_set().prefix(n);
  std::vector<Index> sub(full.begin() + 1, full.end());
  auto radius = [&](const std::vector<Index>& w) {
    if (w.empty()) return 0.0;
    return operator_spectral_radius(TruncatedOperator::build(m, w)).value;
  };
  double rf = radius(full), rs = radius(sub);
  r.h_full = rf > 0 ? std::log(rf) : -INFINITY;
  r.h_sub = rs > 0 ? std::log(rs) : -INFINITY;
  r.sub_equal = std::isfinite(r.h_sub) && std::abs(r.h_full - r.h_sub) <= tol;
  if (auto d = drop_first(m)) r.self_embedding = canonical(*d) == canonical(m);
  if (r.self_embedding) r.note = "removing the base vertex reproduces the matrix: transient";
  else if (r.sub_equal) r.note = "entropy survives removing the base vertex: not strongly recurrent";
  else r.note = "removing the base vertex lowers the entropy: consistent with strong recurrence";
  return r;
}

}  // namespace cslope
