#include "nearperf/relk.hpp"

#include "nearperf/linalg.hpp"

namespace nearperf {

namespace {

RatMatrix free_block(const MixedModule& a, const MixedModule& b, const RatMatrix& m) {
  return m.block(0, 0, b.free_rank(), a.free_rank());
}

Int finite_order(const MixedModule& m, const std::string& what) {
  require(m.is_finite(), what + " is not finite: " + m.to_string());
  return m.order();
}

}  // namespace

void check_triple(const TripleClass& t) {
  require(t.a.is_finitely_generated() && t.b.is_finitely_generated(), "triple needs finitely generated modules");
  require(t.g.rows() == t.b.free_rank() && t.g.cols() == t.a.free_rank(),
          "g must be " + std::to_string(t.b.free_rank()) + "x" + std::to_string(t.a.free_rank()));
  require(t.g.rows() == t.g.cols() && (t.g.rows() == 0 || determinant(t.g) != 0), "g is not invertible");
}

PosRational g0_class_with(const TripleClass& t, const ModuleHom& h, const Int& n) {
  check_triple(t);
  require(n >= 1, "n must be positive");
  require(h.source() == t.a && h.target() == t.b, "h must map A to B");
  require(free_block(t.a, t.b, h.matrix()) == Rat(n) * t.g, "h does not restrict to n·g rationally");
  const Int coker = finite_order(cokernel(h).module, "coker h");
  const Int ker = finite_order(kernel(h).module, "ker h");
  const Int quot = finite_order(reduce_mod_n(t.b, n).module, "B/nB");
  const Int tors = finite_order(n_torsion(t.b, n).module, "nB");
  Rat q(coker * tors, ker * quot);
  q.canonicalize();
  return q;
}

PosRational g0_class(const TripleClass& t) {
  check_triple(t);
  const Int n = common_denominator(t.g);
  auto with = [&](const Int& m) {
    RatMatrix h(t.b.dim(), t.a.dim());
    h.set_block(0, 0, Rat(m) * t.g);
    return g0_class_with(t, ModuleHom(t.a, t.b, h), m);
  };
  const PosRational v = with(n);
  ensure(v == with(2 * n), "class depends on the chosen denominator");
  return v;
}

PosRational k0_class(const TripleClass& t) {
  require(t.a.is_torsion_free() && t.b.is_torsion_free() && t.a.q_rank() == 0 && t.b.q_rank() == 0,
          "K0 triple needs free modules");
  require(t.a.free_rank() == t.b.free_rank(), "K0 triple needs equal ranks");
  check_triple(t);
  Rat det = determinant(t.g);
  if (det < 0) det = -det;
  const Int n = common_denominator(t.g);
  const IntMatrix alpha = to_int(Rat(n) * t.g);
  Int coker = 1;
  for (const auto& d : snf(alpha).diagonal()) coker *= d;
  Int quot = 1;
  for (std::size_t i = 0; i < t.a.free_rank(); ++i) quot *= n;
  Rat via(coker, quot);
  via.canonicalize();
  ensure(via == det, "determinant and cokernel routes disagree");
  return det;
}

PosRational finite_module_class(const MixedModule& m) {
  const Int order = finite_order(m, "module");
  const std::size_t r = m.torsion().size();
  RatMatrix d(r, r);
  for (std::size_t i = 0; i < r; ++i) d(i, i) = Rat(m.torsion()[i]);
  const PosRational via = k0_class({MixedModule::free(r), d, MixedModule::free(r)});
  ensure(via == Rat(order), "resolution class differs from the order");
  return Rat(order);
}

PosRational boundary(const Rat& unit) {
  require(unit != 0, "boundary of zero");
  return unit < 0 ? Rat(-unit) : unit;
}

PosRational boundary(const RatMatrix& unit) {
  require(unit.rows() == unit.cols(), "unit must be square");
  return boundary(unit.rows() == 0 ? Rat(1) : determinant(unit));
}

long localize(const PosRational& q, const Int& l) {
  require(q > 0, "class must be positive");
  require(is_prime(l), "l must be prime, got " + l.get_str());
  return valuation(q, l);
}

LocalValuationVector local_components(const PosRational& q) {
  require(q > 0, "class must be positive");
  LocalValuationVector v;
  for (const Int* part : {&q.get_num(), &q.get_den()})
    for (const auto& l : prime_factors(*part)) v[l] = valuation(q, l);
  return v;
}

PosRational assemble(const LocalValuationVector& v) {
  Rat q = 1;
  for (const auto& [l, e] : v) {
    require(is_prime(l), "assemble needs primes, got " + l.get_str());
    Int p;
    mpz_pow_ui(p.get_mpz_t(), l.get_mpz_t(), static_cast<unsigned long>(e < 0 ? -e : e));
    q *= e < 0 ? Rat(1, p) : Rat(p);
  }
  q.canonicalize();
  return q;
}

}  // namespace nearperf
