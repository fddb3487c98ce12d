#include "nearperf/subgroup.hpp"

#include <utility>

namespace nearperf {

namespace {

IntMatrix scaled_to_int(const RatMatrix& m, const Int& den) { return to_int(Rat(den) * m); }

/// Integer kernel of a rational matrix (rows rescaled to integers first).
IntMatrix integer_kernel(const RatMatrix& m) {
  RatMatrix s = m;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    Int den = 1;
    for (std::size_t j = 0; j < s.cols(); ++j) den = lcm(den, s(i, j).get_den());
    s.scale_row(i, Rat(den));
  }
  return kernel_basis(to_int(s));
}

}  // namespace

RatMatrix left_inverse(const RatMatrix& b) {
  if (b.cols() == 0) return RatMatrix(0, b.rows());
  RatMatrix bt = b.transpose();
  return inverse(bt * b) * bt;
}

Subgroup::Subgroup(std::size_t dim) : dim_(dim), rows_(0, dim), lattice_(dim, 0) {}

Subgroup Subgroup::generated(std::size_t dim, const RatMatrix& rational_gens, const RatMatrix& integral_gens) {
  if ((rational_gens.cols() > 0 && rational_gens.rows() != dim) ||
      (integral_gens.cols() > 0 && integral_gens.rows() != dim))
    throw DimensionError("subgroup generators have wrong ambient dimension");
  Subgroup s(dim);
  if (rational_gens.cols() > 0) {
    RowEchelon e = rref(rational_gens.transpose());
    s.pivots_ = e.pivots;
    s.rows_ = e.R.block(0, 0, e.pivots.size(), dim);
  }
  if (integral_gens.cols() == 0) return s;

  RatMatrix reduced(dim, integral_gens.cols());
  for (std::size_t j = 0; j < integral_gens.cols(); ++j) reduced.set_column(j, s.reduce(integral_gens.column(j)));
  std::vector<std::size_t> freec = s.free_coordinates();
  RatMatrix bar = reduced.select_rows(freec);
  Int den = common_denominator(bar);
  IntMatrix h = lattice_basis(scaled_to_int(bar, den));
  RatMatrix lat(dim, h.cols());
  for (std::size_t i = 0; i < freec.size(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j) {
      lat(freec[i], j) = Rat(h(i, j), den);
      lat(freec[i], j).canonicalize();
    }
  for (auto& v : lat.data()) check_bits(v.get_num()), check_bits(v.get_den());
  s.lattice_ = std::move(lat);
  return s;
}

Subgroup Subgroup::whole(std::size_t dim) { return generated(dim, RatMatrix::identity(dim), RatMatrix(dim, 0)); }

Subgroup Subgroup::lattice_of(const RatMatrix& gens) { return generated(gens.rows(), RatMatrix(gens.rows(), 0), gens); }

Subgroup Subgroup::span_of(const RatMatrix& gens) { return generated(gens.rows(), gens, RatMatrix(gens.rows(), 0)); }

RatMatrix Subgroup::span() const { return rows_.transpose(); }

std::vector<std::size_t> Subgroup::free_coordinates() const {
  std::vector<bool> piv(dim_, false);
  for (auto p : pivots_) piv[p] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dim_; ++i)
    if (!piv[i]) out.push_back(i);
  return out;
}

RatVector Subgroup::reduce(const RatVector& x) const {
  if (x.size() != dim_) throw DimensionError("vector has wrong ambient dimension");
  RatVector y = x;
  for (std::size_t r = 0; r < pivots_.size(); ++r) {
    const Rat c = y[pivots_[r]];
    if (c == 0) continue;
    for (std::size_t j = 0; j < dim_; ++j) y[j] -= c * rows_(r, j);
  }
  return y;
}

RatMatrix Subgroup::quotient_map() const {
  std::vector<std::size_t> freec = free_coordinates();
  RatMatrix q(freec.size(), dim_);
  for (std::size_t i = 0; i < freec.size(); ++i) q(i, freec[i]) = 1;
  for (std::size_t r = 0; r < pivots_.size(); ++r)
    for (std::size_t i = 0; i < freec.size(); ++i) q(i, pivots_[r]) -= rows_(r, freec[i]);
  return q;
}

RatMatrix Subgroup::section() const {
  std::vector<std::size_t> freec = free_coordinates();
  RatMatrix s(dim_, freec.size());
  for (std::size_t i = 0; i < freec.size(); ++i) s(freec[i], i) = 1;
  return s;
}

std::optional<std::pair<RatVector, IntVector>> Subgroup::decompose(const RatVector& x) const {
  RatVector y = reduce(x);
  RatVector u(pivots_.size());
  for (std::size_t r = 0; r < pivots_.size(); ++r) u[r] = x[pivots_[r]];
  Int den = lattice_.cols() ? common_denominator(lattice_) : Int(1);
  for (const auto& v : y) den = lcm(den, v.get_den());
  IntMatrix lat = scaled_to_int(lattice_, den);
  IntVector rhs(dim_);
  for (std::size_t i = 0; i < dim_; ++i) rhs[i] = Rat(y[i] * den).get_num();
  auto z = solve_integral(lat, rhs);
  if (!z) return std::nullopt;
  return std::make_pair(std::move(u), std::move(*z));
}

bool Subgroup::contains(const RatVector& x) const { return decompose(x).has_value(); }

bool Subgroup::contains_line(const RatVector& x) const {
  for (const auto& v : reduce(x))
    if (v != 0) return false;
  return true;
}

bool Subgroup::contains(const Subgroup& other) const {
  if (other.dim_ != dim_) throw DimensionError("subgroups live in different ambient spaces");
  for (std::size_t r = 0; r < other.rows_.rows(); ++r)
    if (!contains_line(other.rows_.row(r))) return false;
  for (std::size_t j = 0; j < other.lattice_.cols(); ++j)
    if (!contains(other.lattice_.column(j))) return false;
  return true;
}

Subgroup sum(const Subgroup& a, const Subgroup& b) {
  if (a.dim() != b.dim()) throw DimensionError("sum of subgroups in different ambient spaces");
  return Subgroup::generated(a.dim(), hconcat(a.span(), b.span()), hconcat(a.lattice(), b.lattice()));
}

Subgroup image(const RatMatrix& f, const Subgroup& s) {
  if (f.cols() != s.dim()) throw DimensionError("image: map and subgroup dimensions differ");
  RatMatrix sp = s.span_dim() ? f * s.span() : RatMatrix(f.rows(), 0);
  RatMatrix lt = s.lattice_rank() ? f * s.lattice() : RatMatrix(f.rows(), 0);
  return Subgroup::generated(f.rows(), sp, lt);
}

Subgroup preimage_within(const Subgroup& d, const RatMatrix& g, const Subgroup& s) {
  if (g.cols() != d.dim() || g.rows() != s.dim()) throw DimensionError("preimage_within: dimension mismatch");
  const RatMatrix a = d.span();
  const RatMatrix b = d.lattice();
  const RatMatrix h = s.quotient_map() * g;
  const RatMatrix cbar = s.quotient_map() * s.lattice();
  const RatMatrix ha = h * a;
  const RatMatrix hb = h * b;

  // Rational part: A · ker(hA).
  RatMatrix rational = a * nullspace(ha);

  // Integral part: (z, w) with hB z − C̄ w in the column space of hA.
  RatMatrix nl = left_nullspace(ha);
  RatMatrix sys = hconcat(nl * hb, -(nl * cbar));
  if (sys.cols() == 0) return Subgroup::generated(d.dim(), rational, RatMatrix(d.dim(), 0));
  IntMatrix ker = sys.rows() ? integer_kernel(sys) : IntMatrix::identity(sys.cols());
  const std::size_t q = b.cols();
  RatMatrix integral(d.dim(), ker.cols());
  for (std::size_t j = 0; j < ker.cols(); ++j) {
    RatVector z(q), w(cbar.cols());
    for (std::size_t i = 0; i < q; ++i) z[i] = Rat(ker(i, j));
    for (std::size_t i = 0; i < cbar.cols(); ++i) w[i] = Rat(ker(q + i, j));
    RatVector rhs = cbar.apply(w);
    RatVector hbz = hb.apply(z);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= hbz[i];
    auto u = solve_rational(ha, rhs);
    ensure(u.has_value(), "preimage_within: inconsistent lift");
    RatVector x = b.apply(z);
    RatVector au = a.apply(*u);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += au[i];
    integral.set_column(j, x);
  }
  return Subgroup::generated(d.dim(), rational, integral);
}

Subgroup intersect(const Subgroup& a, const Subgroup& b) {
  return preimage_within(a, RatMatrix::identity(a.dim()), b);
}

std::optional<RatVector> solve_within(const Subgroup& d, const RatMatrix& g, const Subgroup& s, const RatVector& t) {
  if (t.size() != g.rows()) throw DimensionError("solve_within: target has wrong dimension");
  const std::size_t n = d.dim();
  // Adjoin a coordinate carrying the multiple of t; look for an element with that coordinate equal to 1.
  RatMatrix sp(n + 1, d.span_dim());
  if (d.span_dim()) sp.set_block(0, 0, d.span());
  RatMatrix lt(n + 1, d.lattice_rank() + 1);
  if (d.lattice_rank()) lt.set_block(0, 0, d.lattice());
  lt(n, d.lattice_rank()) = 1;
  Subgroup dd = Subgroup::generated(n + 1, sp, lt);
  RatMatrix gg(g.rows(), n + 1);
  gg.set_block(0, 0, g);
  for (std::size_t i = 0; i < t.size(); ++i) gg(i, n) = -t[i];
  Subgroup pre = preimage_within(dd, gg, s);
  const RatMatrix& l = pre.lattice();
  IntMatrix last(1, l.cols());
  for (std::size_t j = 0; j < l.cols(); ++j) last(0, j) = l(n, j).get_num();
  auto c = solve_integral(last, {Int(1)});
  if (!c) return std::nullopt;
  RatVector x(n);
  for (std::size_t j = 0; j < l.cols(); ++j)
    for (std::size_t i = 0; i < n; ++i) x[i] += Rat((*c)[j]) * l(i, j);
  return x;
}

Subquotient normalize(const Subgroup& x, const Subgroup& y) {
  if (!x.contains(y)) throw PreconditionError("normalize: Y is not contained in X");
  const std::size_t n = x.dim();

  // Quotient by the rational part of Y.
  const RatMatrix rho_y = y.quotient_map();
  const RatMatrix sig_y = y.section();
  const Subgroup x1 = image(rho_y, x);
  const Subgroup y1 = image(rho_y, y);  // a lattice L
  const std::size_t n1 = x1.dim();

  // Quotient by the divisible subspace W of X1.
  const Subgroup w_sub = Subgroup::span_of(x1.span_dim() ? x1.span() : RatMatrix(n1, 0));
  const RatMatrix rho_w = w_sub.quotient_map();
  const RatMatrix sig_w = w_sub.section();
  const RatMatrix bmat = rho_w * x1.lattice();  // basis of Λ̄
  const std::size_t s = bmat.cols();
  const RatMatrix bplus = left_inverse(bmat);

  // Relations L̄ in the basis of Λ̄, then Smith form.
  const RatMatrix lgens = y1.lattice();
  const std::size_t g = lgens.cols();
  IntMatrix rel = s ? to_int(bplus * (rho_w * lgens)) : IntMatrix(0, g);
  SnfDecomposition snfd = snf(rel);
  const RatMatrix u_rat = to_rat(snfd.U);
  const RatMatrix b_prime = s ? bmat * inverse(u_rat) : RatMatrix(bmat.rows(), 0);
  const RatMatrix l_prime = g ? lgens * to_rat(snfd.V) : RatMatrix(n1, 0);
  std::vector<Int> dvals(s, Int(0));
  for (std::size_t i = 0; i < std::min(s, g); ++i) dvals[i] = snfd.D(i, i);

  // φ(B'_i) ∈ W chosen so that the retraction below kills L.
  RatMatrix phi(n1, s);
  for (std::size_t i = 0; i < s; ++i) {
    if (dvals[i] == 0) continue;
    RatVector lp = l_prime.column(i);
    RatVector sb = sig_w.apply(b_prime.column(i));
    for (std::size_t k = 0; k < n1; ++k) phi(k, i) = -(lp[k] - Rat(dvals[i]) * sb[k]) / Rat(dvals[i]);
  }

  // W ∩ L and a complement of its span inside W.
  const Subgroup wl = intersect(w_sub, y1);
  const RatMatrix ell = wl.lattice();
  std::vector<RatVector> wprime;
  {
    RatMatrix acc = ell;
    const RatMatrix wbasis = w_sub.span();
    std::size_t r = rank(acc.cols() ? acc : RatMatrix(n1, 0));
    for (std::size_t j = 0; j < wbasis.cols(); ++j) {
      RatMatrix trial = hconcat(acc.cols() ? acc : RatMatrix(n1, 0), column_matrix<Rat>({wbasis.column(j)}, n1));
      std::size_t r2 = rank(trial);
      if (r2 > r) {
        acc = trial;
        r = r2;
        wprime.push_back(wbasis.column(j));
      }
    }
  }
  const RatMatrix wp = column_matrix(wprime, n1);
  const RatMatrix wbasis_ordered = hconcat(wp.cols() ? wp : RatMatrix(n1, 0), ell);
  const RatMatrix wcoords = left_inverse(wbasis_ordered);

  // Retraction X1 → W modulo W ∩ L.
  const RatMatrix coords = s ? u_rat * bplus * rho_w : RatMatrix(0, n1);
  RatMatrix retract = RatMatrix::identity(n1) - sig_w * rho_w;
  if (s) retract = retract + phi * coords;

  Subquotient out;
  std::vector<std::size_t> free_idx, tors_idx;
  for (std::size_t i = 0; i < s; ++i) {
    if (dvals[i] == 0)
      free_idx.push_back(i);
    else if (dvals[i] != 1)
      tors_idx.push_back(i);
  }
  out.free_rank = free_idx.size();
  for (auto i : tors_idx) out.torsion.push_back(dvals[i]);
  out.q_rank = wp.cols();
  out.qz_rank = ell.cols();
  const std::size_t nf = out.free_rank + tors_idx.size() + out.q_rank + out.qz_rank;

  std::vector<std::size_t> zt_idx = free_idx;
  zt_idx.insert(zt_idx.end(), tors_idx.begin(), tors_idx.end());
  RatMatrix top = coords.select_rows(zt_idx) * rho_y;
  RatMatrix bottom = (wcoords * retract) * rho_y;
  out.to_nf = RatMatrix(nf, n);
  if (top.rows()) out.to_nf.set_block(0, 0, top);
  if (bottom.rows()) out.to_nf.set_block(zt_idx.size(), 0, bottom);

  out.from_nf = RatMatrix(n, nf);
  std::size_t col = 0;
  for (auto i : free_idx) out.from_nf.set_column(col++, sig_y.apply(sig_w.apply(b_prime.column(i))));
  for (auto i : tors_idx) {
    RatVector v = sig_w.apply(b_prime.column(i));
    for (std::size_t k = 0; k < n1; ++k) v[k] -= phi(k, i);
    out.from_nf.set_column(col++, sig_y.apply(v));
  }
  for (std::size_t j = 0; j < wp.cols(); ++j) out.from_nf.set_column(col++, sig_y.apply(wp.column(j)));
  for (std::size_t j = 0; j < ell.cols(); ++j) out.from_nf.set_column(col++, sig_y.apply(ell.column(j)));
  return out;
}

}  // namespace nearperf
