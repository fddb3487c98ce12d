#include "nearperf/mixed_module.hpp"

#include <algorithm>
#include <sstream>

namespace nearperf {

namespace {

Rat frac(const Rat& x) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return x - Rat(q);
}

Int mod(const Int& x, const Int& n) {
  Int r;
  mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), n.get_mpz_t());
  return r;
}

bool is_int(const Rat& x) { return x.get_den() == 1; }

bool divides(const Int& d, const Int& a) { return mpz_divisible_p(a.get_mpz_t(), d.get_mpz_t()) != 0; }

MixedModule module_of(const Subquotient& s) { return {s.free_rank, s.torsion, s.q_rank, s.qz_rank}; }

void append_term(std::ostringstream& os, bool& first, const std::string& base, std::size_t power) {
  if (power == 0) return;
  if (!first) os << " + ";
  first = false;
  os << base;
  if (power > 1) os << "^" << power;
}

}  // namespace

MixedModule::MixedModule(std::size_t free_rank, IntVector torsion, std::size_t q_rank, std::size_t qz_rank)
    : a_(free_rank), t_(std::move(torsion)), b_(q_rank), c_(qz_rank) {
  for (std::size_t i = 0; i < t_.size(); ++i) {
    require(t_[i] >= 2, "torsion orders must be at least 2");
    if (i > 0) require(divides(t_[i - 1], t_[i]), "torsion orders must form a divisibility chain");
  }
}

MixedModule MixedModule::finite(const IntVector& orders) {
  const std::size_t k = orders.size();
  RatMatrix rel(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    require(orders[i] >= 1, "orders of cyclic summands must be positive");
    rel(i, i) = Rat(orders[i]);
  }
  return present(Subgroup::lattice_of(RatMatrix::identity(k)), Subgroup::lattice_of(rel)).module;
}

Summand MixedModule::kind(std::size_t coord) const {
  if (coord < a_) return Summand::Free;
  if (coord < q_offset()) return Summand::Torsion;
  if (coord < qz_offset()) return Summand::Rational;
  return Summand::RationalModOne;
}

Subgroup MixedModule::ambient() const {
  const std::size_t n = dim();
  RatMatrix lat(n, a_ + t_.size());
  for (std::size_t i = 0; i < a_ + t_.size(); ++i) lat(i, i) = 1;
  RatMatrix sp(n, b_ + c_);
  for (std::size_t i = 0; i < b_ + c_; ++i) sp(q_offset() + i, i) = 1;
  return Subgroup::generated(n, sp, lat);
}

Subgroup MixedModule::relations() const {
  const std::size_t n = dim();
  RatMatrix lat(n, t_.size() + c_);
  for (std::size_t i = 0; i < t_.size(); ++i) lat(a_ + i, i) = Rat(t_[i]);
  for (std::size_t i = 0; i < c_; ++i) lat(qz_offset() + i, t_.size() + i) = 1;
  return Subgroup::lattice_of(lat);
}

Int MixedModule::order() const {
  require(is_finite(), "order of an infinite module");
  Int o = 1;
  for (const auto& n : t_) o *= n;
  return o;
}

std::string MixedModule::to_string() const {
  std::ostringstream os;
  bool first = true;
  append_term(os, first, "Z", a_);
  for (const auto& n : t_) append_term(os, first, "Z/" + n.get_str(), 1);
  append_term(os, first, "Q", b_);
  append_term(os, first, c_ > 1 ? "(Q/Z)" : "Q/Z", c_);
  if (first) os << "0";
  return os.str();
}

bool is_homomorphism(const MixedModule& source, const MixedModule& target, const RatMatrix& m) {
  if (m.rows() != target.dim() || m.cols() != source.dim()) return false;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const Summand cj = source.kind(j);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const Rat& v = m(i, j);
      if (v == 0) continue;
      const Summand ri = target.kind(i);
      const bool int_row = ri == Summand::Free || ri == Summand::Torsion;
      switch (cj) {
        case Summand::Free:
          if (int_row && !is_int(v)) return false;
          break;
        case Summand::Torsion: {
          const Int& n = source.order_at(j);
          if (ri == Summand::Free || ri == Summand::Rational) return false;
          if (ri == Summand::Torsion && (!is_int(v) || !divides(target.order_at(i), n * v.get_num()))) return false;
          if (ri == Summand::RationalModOne && !is_int(Rat(v * Rat(n)))) return false;
          break;
        }
        case Summand::Rational:
          if (int_row) return false;
          break;
        case Summand::RationalModOne:
          if (int_row || ri == Summand::Rational) return false;
          if (!is_int(v)) return false;
          break;
      }
    }
  }
  return true;
}

RatMatrix canonical_matrix(const MixedModule& source, const MixedModule& target, const RatMatrix& m) {
  RatMatrix c = m;
  for (std::size_t j = 0; j < c.cols(); ++j) {
    const Summand cj = source.kind(j);
    if (cj != Summand::Free && cj != Summand::Torsion) continue;
    for (std::size_t i = 0; i < c.rows(); ++i) {
      const Summand ri = target.kind(i);
      if (ri == Summand::Torsion)
        c(i, j) = Rat(mod(c(i, j).get_num(), target.order_at(i)));
      else if (ri == Summand::RationalModOne)
        c(i, j) = frac(c(i, j));
    }
  }
  return c;
}

ModuleHom::ModuleHom(MixedModule source, MixedModule target, const RatMatrix& m)
    : src_(std::move(source)), tgt_(std::move(target)) {
  if (m.rows() != tgt_.dim() || m.cols() != src_.dim())
    throw DimensionError("homomorphism matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         ", expected " + std::to_string(tgt_.dim()) + "x" + std::to_string(src_.dim()));
  if (!is_homomorphism(src_, tgt_, m))
    throw OutOfClassError("matrix does not define a homomorphism " + src_.to_string() + " -> " + tgt_.to_string());
  m_ = canonical_matrix(src_, tgt_, m);
}

ModuleHom ModuleHom::zero(const MixedModule& source, const MixedModule& target) {
  return ModuleHom(source, target, RatMatrix(target.dim(), source.dim()));
}

ModuleHom ModuleHom::identity(const MixedModule& m) { return ModuleHom(m, m, RatMatrix::identity(m.dim())); }

ModuleHom operator*(const ModuleHom& g, const ModuleHom& f) {
  if (!(g.src_ == f.tgt_)) throw DimensionError("composition of non-composable homomorphisms");
  return ModuleHom(f.src_, g.tgt_, g.m_ * f.m_);
}

ModuleHom operator+(const ModuleHom& f, const ModuleHom& g) {
  if (!(f.src_ == g.src_) || !(f.tgt_ == g.tgt_)) throw DimensionError("sum of homomorphisms with different ends");
  return ModuleHom(f.src_, f.tgt_, f.m_ + g.m_);
}

ModuleHom operator-(const ModuleHom& f, const ModuleHom& g) {
  if (!(f.src_ == g.src_) || !(f.tgt_ == g.tgt_)) throw DimensionError("difference of homomorphisms with different ends");
  return ModuleHom(f.src_, f.tgt_, f.m_ - g.m_);
}

ModuleHom operator-(const ModuleHom& f) { return ModuleHom(f.src_, f.tgt_, -f.m_); }

ModuleHom operator*(const Int& k, const ModuleHom& f) { return ModuleHom(f.src_, f.tgt_, Rat(k) * f.m_); }

Presented present(const Subgroup& x, const Subgroup& y) {
  Subquotient s = normalize(x, y);
  return {module_of(s), std::move(s.to_nf), std::move(s.from_nf)};
}

Kernel kernel(const ModuleHom& f) {
  const MixedModule& s = f.source();
  Subgroup k = preimage_within(s.ambient(), f.matrix(), f.target().relations());
  Presented p = present(k, s.relations());
  return {p.module, ModuleHom(p.module, s, p.from)};
}

Cokernel cokernel(const ModuleHom& f) {
  const MixedModule& t = f.target();
  Subgroup rel = sum(t.relations(), nearperf::image(f.matrix(), f.source().ambient()));
  Presented p = present(t.ambient(), rel);
  return {p.module, ModuleHom(t, p.module, p.to)};
}

Image image(const ModuleHom& f) {
  const MixedModule& t = f.target();
  Subgroup im = sum(t.relations(), nearperf::image(f.matrix(), f.source().ambient()));
  Presented p = present(im, t.relations());
  return {p.module, ModuleHom(f.source(), p.module, p.to * f.matrix()), ModuleHom(p.module, t, p.from)};
}

bool is_injective(const ModuleHom& f) { return kernel(f).module.is_zero(); }
bool is_surjective(const ModuleHom& f) { return cokernel(f).module.is_zero(); }
bool is_isomorphism(const ModuleHom& f) { return is_injective(f) && is_surjective(f); }

DirectSum direct_sum(const std::vector<MixedModule>& parts) {
  std::size_t n = 0;
  for (const auto& p : parts) n += p.dim();
  RatMatrix xs(n, 0), xl(n, 0), yl(n, 0);
  std::vector<std::size_t> offs;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offs.push_back(off);
    RatMatrix e(n, p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) e(off + i, i) = 1;
    const Subgroup x = p.ambient(), y = p.relations();
    if (x.span_dim()) xs = hconcat(xs, e * x.span());
    if (x.lattice_rank()) xl = hconcat(xl, e * x.lattice());
    if (y.lattice_rank()) yl = hconcat(yl, e * y.lattice());
    off += p.dim();
  }
  Presented pr = present(Subgroup::generated(n, xs, xl), Subgroup::lattice_of(yl));
  DirectSum out{pr.module, {}, {}};
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t d = parts[k].dim();
    RatMatrix e(n, d);
    for (std::size_t i = 0; i < d; ++i) e(offs[k] + i, i) = 1;
    out.injections.emplace_back(parts[k], pr.module, pr.to * e);
    out.projections.emplace_back(pr.module, parts[k], e.transpose() * pr.from);
  }
  return out;
}

Kernel divisible_part(const MixedModule& m) {
  MixedModule d(0, {}, m.q_rank(), m.qz_rank());
  RatMatrix inc(m.dim(), d.dim());
  for (std::size_t i = 0; i < d.dim(); ++i) inc(m.q_offset() + i, i) = 1;
  return {d, ModuleHom(d, m, inc)};
}

Cokernel codivisible_quotient(const MixedModule& m) {
  MixedModule q(m.free_rank(), m.torsion(), 0, 0);
  RatMatrix proj(q.dim(), m.dim());
  for (std::size_t i = 0; i < q.dim(); ++i) proj(i, i) = 1;
  return {q, ModuleHom(m, q, proj)};
}

Kernel n_torsion(const MixedModule& m, const Int& n) {
  require(n >= 1, "n must be positive");
  return kernel(n * ModuleHom::identity(m));
}

Cokernel reduce_mod_n(const MixedModule& m, const Int& n) {
  require(n >= 1, "n must be positive");
  return cokernel(n * ModuleHom::identity(m));
}

std::string LAdicModule::to_string() const {
  std::ostringstream os;
  bool first = true;
  append_term(os, first, "Z_" + prime.get_str(), free_rank);
  for (long e : exponents) {
    Int q;
    mpz_pow_ui(q.get_mpz_t(), prime.get_mpz_t(), static_cast<unsigned long>(e));
    append_term(os, first, "Z/" + q.get_str(), 1);
  }
  if (first) os << "0";
  return os.str();
}

LAdicModule ladic_sum(const LAdicModule& x, const LAdicModule& y) {
  require(x.prime == y.prime, "sum of l-adic modules at different primes");
  LAdicModule s{x.prime, x.free_rank + y.free_rank, x.exponents};
  s.exponents.insert(s.exponents.end(), y.exponents.begin(), y.exponents.end());
  std::sort(s.exponents.begin(), s.exponents.end());
  return s;
}

LAdicModule tate_module(const MixedModule& m, const Int& l) {
  require(is_prime(l), "l must be prime");
  return {l, m.qz_rank(), {}};
}

LAdicModule complete(const MixedModule& m, const Int& l) {
  require(is_prime(l), "l must be prime");
  LAdicModule out{l, m.free_rank(), {}};
  for (const auto& n : m.torsion()) {
    long v = valuation(n, l);
    if (v > 0) out.exponents.push_back(v);
  }
  std::sort(out.exponents.begin(), out.exponents.end());
  return out;
}

LAdicModule localize(const MixedModule& m, const Int& l) {
  require(m.is_finitely_generated(), "localize expects a finitely generated module");
  return complete(m, l);
}

namespace {

ModuleHom power(const ModuleHom& f, std::size_t e) {
  ModuleHom r = ModuleHom::identity(f.source());
  for (std::size_t i = 0; i < e; ++i) r = f * r;
  return r;
}

}  // namespace

bool is_valid_action(const CyclicModule& m) {
  if (m.order == 0) return false;
  if (!(m.sigma.source() == m.module) || !(m.sigma.target() == m.module)) return false;
  return power(m.sigma, m.order) == ModuleHom::identity(m.module) && is_isomorphism(m.sigma);
}

std::pair<MixedModule, MixedModule> tate_cohomology(const CyclicModule& m, std::size_t k) {
  require(k >= 1 && m.order % k == 0, "subgroup order must divide the group order");
  const ModuleHom tau = power(m.sigma, m.order / k);
  ModuleHom norm = ModuleHom::zero(m.module, m.module);
  ModuleHom t = ModuleHom::identity(m.module);
  for (std::size_t j = 0; j < k; ++j) {
    norm = norm + t;
    t = tau * t;
  }
  const ModuleHom diff = tau - ModuleHom::identity(m.module);
  const Subgroup x = m.module.ambient(), y = m.module.relations();

  auto quotient = [&](const ModuleHom& kill, const ModuleHom& hit) {
    Subgroup ker = preimage_within(x, kill.matrix(), y);
    Subgroup im = sum(nearperf::image(hit.matrix(), x), y);
    ensure(ker.contains(im), "action is not of the declared order");
    return present(ker, im).module;
  };
  return {quotient(diff, norm), quotient(norm, diff)};
}

bool is_cohomologically_trivial(const CyclicModule& m) {
  require(m.order >= 1, "group order must be positive");
  for (std::size_t k = 1; k <= m.order; ++k) {
    if (m.order % k != 0) continue;
    auto [h0, h1] = tate_cohomology(m, k);
    if (!h0.is_zero() || !h1.is_zero()) return false;
  }
  return true;
}

bool completion_is_cohomologically_trivial(const CyclicModule& m, const Int& l) {
  require(m.module.is_torsion_free(), "completion check expects a torsion-free module");
  const std::size_t a = m.module.free_rank();
  const MixedModule z = MixedModule::free(a);
  const ModuleHom induced(z, z, m.sigma.matrix().block(0, 0, a, a));
  const CyclicModule zm{z, induced, m.order};
  for (std::size_t k = 1; k <= m.order; ++k) {
    if (m.order % k != 0) continue;
    auto [h0, h1] = tate_cohomology(zm, k);
    ensure(h0.is_finite() && h1.is_finite(), "Tate groups of a lattice must be finite");
    if (!complete(h0, l).exponents.empty() || !complete(h1, l).exponents.empty()) return false;
  }
  return true;
}

}  // namespace nearperf
