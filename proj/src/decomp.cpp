#include "paratomo/decomp.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <utility>

#include "paratomo/gauge_ops.hpp"
#include "paratomo/phantom.hpp"
#include "paratomo/rng.hpp"

namespace paratomo {

namespace {

// Unknown layout: one shared value at the pole, every interior node, nothing
// on the boundary ring (pinned to zero).  Reduced node 0 is the pole; node
// 1 + (i-1)*n_theta + j is grid node (i, j) for 1 <= i <= n_r - 2.
struct Reduction {
    GridPtr grid;
    int nodes = 0;

    explicit Reduction(GridPtr g) : grid(std::move(g)), nodes(1 + (grid->n_r - 2) * grid->n_theta) {}

    void rep(int rn, int& i, int& j) const {
        if (rn == 0) {
            i = 0;
            j = 0;
        } else {
            i = 1 + (rn - 1) / grid->n_theta;
            j = (rn - 1) % grid->n_theta;
        }
    }

    Eigen::VectorXcd restrict_field(const Field& f) const {
        Eigen::VectorXcd v(std::size_t(nodes) * f.k);
        for (int rn = 0; rn < nodes; ++rn) {
            int i, j;
            rep(rn, i, j);
            for (int c = 0; c < f.k; ++c) v[std::size_t(rn) * f.k + c] = f.comp(i, j, c);
        }
        return v;
    }

    Field expand(const Eigen::VectorXcd& v, int comps) const {
        Field f(grid, comps);
        for (int rn = 0; rn < nodes; ++rn) {
            int i, j;
            rep(rn, i, j);
            for (int c = 0; c < comps; ++c) f.comp(i, j, c) = v[std::size_t(rn) * comps + c];
        }
        // every angular copy of the center node carries the same unknown
        for (int j = 1; j < grid->n_theta; ++j)
            for (int c = 0; c < comps; ++c) f.comp(0, j, c) = f.comp(0, 0, c);
        return f;
    }
};

}  // namespace

struct DirichletOperator::Impl {
    MetricField metric;
    const AttenuationPair& pair;
    GridPtr grid;
    int comps;
    Reduction red;
    std::vector<double> wnode;         ///< coord_weight * sqrt(det g) per node
    Eigen::SparseMatrix<Complex> D;    ///< gauge derivative on interior dofs
    Eigen::SparseMatrix<Complex> MD;   ///< D with quadrature and metric pairing applied
    Eigen::SparseMatrix<Complex> L;    ///< D^H M D: Gram operator of the gauge space
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<Complex>> ldlt;

    Impl(const MetricField& m, const AttenuationPair& p, GridPtr g, int nc)
        : metric(m), pair(p), grid(g), comps(nc), red(g) {
        assemble();
    }

    std::size_t row_at(int slot, int id, int c) const {
        return (std::size_t(slot) * grid->count() + id) * comps + c;
    }

    Eigen::VectorXcd flatten(const PairField& h) const {
        const std::size_t block = std::size_t(grid->count()) * comps;
        Eigen::VectorXcd v(3 * block);
        const Field* slots[3] = {&h.a1, &h.a2, &h.f};
        for (int s = 0; s < 3; ++s)
            for (std::size_t a = 0; a < block; ++a) v[s * block + a] = slots[s]->data[a];
        return v;
    }

    // Build the sparse matrix of d applied to the interior unknowns together
    // with its weighted copy, then factor the Hermitian Gram operator.
    // Projections against it are orthogonal in the discrete inner product by
    // construction, so the discrete gauge space and its complement meet only
    // at zero, exactly as in the continuum.
    void assemble() {
        const PolarGrid& g = *grid;
        const int count = g.count();
        const int dim_red = red.nodes * comps;
        const std::size_t dim_full = std::size_t(3) * count * comps;
        wnode.resize(count);
        std::vector<double> gi11(count), gi12(count), gi22(count);
        for (int i = 0; i < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const int id = g.idx(i, j);
                const Vec2 x = g.point(i, j);
                wnode[id] = g.coord_weight(i) * metric.sqrt_det(x);
                const Mat2 gi = metric.metric_inv(x);
                gi11[id] = gi(0, 0);
                gi12[id] = gi(0, 1);
                gi22[id] = gi(1, 1);
            }
        std::vector<Eigen::Triplet<Complex>> dt, mt;
        dt.reserve(std::size_t(dim_red) * 40);
        mt.reserve(std::size_t(dim_red) * 40);
        Field basis(grid, comps);
        for (int rn = 0; rn < red.nodes; ++rn) {
            int bi, bj;
            red.rep(rn, bi, bj);
            for (int c = 0; c < comps; ++c) {
                if (bi == 0) {
                    for (int j = 0; j < g.n_theta; ++j) basis.comp(0, j, c) = Complex(1.0);
                } else {
                    basis.comp(bi, bj, c) = Complex(1.0);
                }
                const PairField col = d_pair(pair, basis);
                const int dof = rn * comps + c;
                // the radial stencils (one-sided at the rim) reach four rings
                // out; the pole rows read rings one and two
                const int ilo = std::max(0, bi - 4);
                const int ihi = std::min(g.n_r - 1, bi + 4);
                for (int i = ilo; i <= ihi; ++i)
                    for (int j = 0; j < g.n_theta; ++j) {
                        const int id = g.idx(i, j);
                        for (int c2 = 0; c2 < comps; ++c2) {
                            const std::size_t at = std::size_t(id) * comps + c2;
                            const Complex v1 = col.a1.data[at];
                            const Complex v2 = col.a2.data[at];
                            const Complex vf = col.f.data[at];
                            if (v1 != Complex(0.0)) dt.emplace_back(int(row_at(0, id, c2)), dof, v1);
                            if (v2 != Complex(0.0)) dt.emplace_back(int(row_at(1, id, c2)), dof, v2);
                            if (vf != Complex(0.0)) dt.emplace_back(int(row_at(2, id, c2)), dof, vf);
                            const double w = wnode[id];
                            if (w == 0.0) continue;
                            const Complex m1 = w * (gi11[id] * v1 + gi12[id] * v2);
                            const Complex m2 = w * (gi12[id] * v1 + gi22[id] * v2);
                            const Complex mf = w * vf;
                            if (m1 != Complex(0.0)) mt.emplace_back(int(row_at(0, id, c2)), dof, m1);
                            if (m2 != Complex(0.0)) mt.emplace_back(int(row_at(1, id, c2)), dof, m2);
                            if (mf != Complex(0.0)) mt.emplace_back(int(row_at(2, id, c2)), dof, mf);
                        }
                    }
                if (bi == 0) {
                    for (int j = 0; j < g.n_theta; ++j) basis.comp(0, j, c) = Complex(0.0);
                } else {
                    basis.comp(bi, bj, c) = Complex(0.0);
                }
            }
        }
        D.resize(Eigen::Index(dim_full), dim_red);
        D.setFromTriplets(dt.begin(), dt.end());
        D.makeCompressed();
        MD.resize(Eigen::Index(dim_full), dim_red);
        MD.setFromTriplets(mt.begin(), mt.end());
        MD.makeCompressed();

        // the column scan above is banded; catch any stencil growing past it
        Rng chk(2027);
        Eigen::VectorXcd probe(dim_red);
        for (Eigen::Index n = 0; n < probe.size(); ++n)
            probe[n] = Complex(chk.uniform(-1.0, 1.0), chk.uniform(-1.0, 1.0));
        const Eigen::VectorXcd direct = flatten(d_pair(pair, red.expand(probe, comps)));
        const double gap = (direct - D * probe).norm() / std::max(1.0, direct.norm());
        if (gap > 1e-12)
            throw SingularSystem("gauge-derivative matrix disagrees with the operator it tabulates");

        L = D.adjoint() * MD;
        L.makeCompressed();
        ldlt.compute(L);
        if (ldlt.info() != Eigen::Success)
            throw SingularSystem("factorization of the gauge Gram operator failed");
    }

    Eigen::VectorXcd solve_reduced(const Eigen::VectorXcd& b) const {
        Eigen::VectorXcd x = ldlt.solve(b);
        if (ldlt.info() != Eigen::Success)
            throw SingularSystem("sparse back-substitution failed");
        const double bn = b.norm();
        if (bn > 0.0) {
            const double res = (L * x - b).norm() / bn;
            if (res > 1e-8)
                throw SingularSystem("Dirichlet solve residual " + std::to_string(res) +
                                     " exceeds 1e-8; system is effectively singular");
        }
        return x;
    }
};

DirichletOperator::DirichletOperator(const MetricField& m, const AttenuationPair& pair, GridPtr grid,
                                     int comps) {
    if (!grid) throw ValidationError("grid", "null grid");
    if (comps <= 0 || comps % pair.rank() != 0)
        throw ValidationError("comps", "component count must be a positive multiple of the pair rank");
    impl_ = std::make_unique<Impl>(m, pair, std::move(grid), comps);
}

DirichletOperator::~DirichletOperator() = default;
DirichletOperator::DirichletOperator(DirichletOperator&&) noexcept = default;

Field DirichletOperator::solve(const Field& source) const {
    if (!source.grid || !source.grid->same(*impl_->grid))
        throw ValidationError("source", "source lives on a different grid");
    if (source.k != impl_->comps)
        throw ValidationError("source", "source component count does not match the operator");
    // weak form: test the source against every interior basis function
    const Reduction& red = impl_->red;
    Eigen::VectorXcd rhs(Eigen::Index(red.nodes) * impl_->comps);
    for (int rn = 0; rn < red.nodes; ++rn) {
        int i, j;
        red.rep(rn, i, j);
        for (int c = 0; c < impl_->comps; ++c) {
            Complex v(0.0);
            if (i == 0) {
                for (int jj = 0; jj < impl_->grid->n_theta; ++jj)
                    v += impl_->wnode[impl_->grid->idx(0, jj)] * source.comp(0, jj, c);
            } else {
                v = impl_->wnode[impl_->grid->idx(i, j)] * source.comp(i, j, c);
            }
            rhs[Eigen::Index(rn) * impl_->comps + c] = v;
        }
    }
    return impl_->red.expand(impl_->solve_reduced(rhs), impl_->comps);
}

Decomposition DirichletOperator::split(const PairField& h) const {
    if (!h.grid || !h.grid->same(*impl_->grid))
        throw ValidationError("h", "field lives on a different grid");
    if (h.a1.k != impl_->comps)
        throw ValidationError("h", "field component count does not match the operator");
    Decomposition out;
    const Eigen::VectorXcd rhs = impl_->MD.adjoint() * impl_->flatten(h);
    out.p = impl_->red.expand(impl_->solve_reduced(rhs), impl_->comps);
    out.h_s = h - d_pair(impl_->pair, out.p);
    out.residual_delta = interior_delta_norm(impl_->metric, impl_->pair, out.h_s);
    return out;
}

Field dirichlet_solve(const MetricField& m, const AttenuationPair& pair, const Field& source) {
    return DirichletOperator(m, pair, source.grid, source.k).solve(source);
}

Decomposition split(const MetricField& m, const AttenuationPair& pair, const PairField& h) {
    return DirichletOperator(m, pair, h.grid, h.a1.k).split(h);
}

double interior_delta_norm(const MetricField& m, const AttenuationPair& pair, const PairField& h) {
    const Field d = delta_pair(m, pair, h);
    const GridPtr& g = h.grid;
    double acc = 0.0;
    for (int i = 0; i < g->n_r - 1; ++i) {
        const double cw = g->coord_weight(i);
        for (int j = 0; j < g->n_theta; ++j) {
            const double w = cw * m.sqrt_det(g->point(i, j));
            for (int c = 0; c < d.k; ++c) acc += w * std::norm(d.comp(i, j, c));
        }
    }
    return std::sqrt(acc);
}

OrthogonalityReport orthogonality_check(const MetricField& m, const AttenuationPair& pair,
                                        const PairField& h, int trials, std::uint64_t seed) {
    const Decomposition dec = split(m, pair, h);
    const double hs_norm = pair_l2_norm(m, dec.h_s);
    Rng rng(seed);
    OrthogonalityReport rep;
    for (int t = 0; t < trials; ++t) {
        const Field q = random_vector_field(h.grid, h.a1.k, rng, /*boundary_zero=*/true);
        const PairField dq = d_pair(pair, q);
        const double dn = pair_l2_norm(m, dq);
        const double ratio = std::abs(pair_inner(m, dec.h_s, dq)) / (hs_norm * dn);
        rep.ratios.push_back(ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    return rep;
}

namespace {

MetricField perturb_metric(const MetricField& m, double eps, Rng& rng) {
    MetricField out = m;
    switch (m.kind) {
        case MetricKind::Euclidean: {
            const SmoothField s = random_scalar_cn(rng, 1, 1.0, m.r_ext);
            out = conformal_metric(field_sum(constant_field(1.0), s.scaled(eps)));
            out.r_core = m.r_core;
            out.r_ext = m.r_ext;
            break;
        }
        case MetricKind::Conformal: {
            const SmoothField s = random_scalar_cn(rng, 1, 1.0, m.r_ext);
            out.c = field_sum(m.c, s.scaled(eps));
            break;
        }
        case MetricKind::General: {
            const SmoothField s1 = random_scalar_cn(rng, 1, 1.0, m.r_ext);
            const SmoothField s2 = random_scalar_cn(rng, 1, 1.0, m.r_ext);
            out.g11_f = field_sum(m.g11_f, s1.scaled(eps));
            out.g22_f = field_sum(m.g22_f, s2.scaled(eps));
            break;
        }
    }
    return out;
}

}  // namespace

PerturbationReport projection_perturbation_probe(const MetricField& m, PairPtr pair, GridPtr grid,
                                                 double eps, int trials, std::uint64_t seed) {
    if (!pair) throw ValidationError("pair", "null pair");
    if (!(eps > 0.0) || eps > 0.1)
        throw ValidationError("eps", "perturbation size must lie in (0, 0.1]");
    Rng rng(seed);
    const int k = pair->rank();

    const PairPtr noise = random_pair_cn(k, 1, 1.0, m.r_ext, rng);
    const auto tilted = std::make_shared<ScaledSumPair>(
        std::vector<std::pair<Complex, PairPtr>>{{Complex(1.0), pair}, {Complex(eps), noise}});
    const MetricField m_tilted = perturb_metric(m, eps, rng);

    const DirichletOperator base(m, *pair, grid, k);
    const DirichletOperator pert(m_tilted, *tilted, grid, k);

    PerturbationReport rep;
    rep.eps = eps;
    for (int t = 0; t < trials; ++t) {
        const PairField h = random_pair_field(grid, k, rng);
        const double hn = pair_l2_norm(m, h);
        if (hn == 0.0) continue;
        const PairField diff = base.split(h).h_s - pert.split(h).h_s;
        rep.max_diff = std::max(rep.max_diff, pair_l2_norm(m, diff) / hn);
    }
    rep.ratio_to_eps = rep.max_diff / eps;
    return rep;
}

}  // namespace paratomo
