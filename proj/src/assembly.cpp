#include "sttrace/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "sttrace/parallel.hpp"

namespace sttrace {

TraceDofMap build_dof_map(const TetMesh& mesh, const SlabReconstruction& R) {
    TraceDofMap m;
    m.slab = R.slab;
    m.t0 = R.t0;
    m.t1 = R.t1;
    std::vector<char> active(mesh.vertices.size(), 0);
    for (const auto& e : R.elements)
        for (int i = 0; i < 4; ++i) active[mesh.tets[e.parent_tet][i]] = 1;
    m.node_rank.assign(mesh.vertices.size(), -1);
    for (std::size_t v = 0; v < active.size(); ++v)
        if (active[v]) {
            m.node_rank[v] = static_cast<std::int32_t>(m.active_nodes.size());
            m.active_nodes.push_back(static_cast<std::int32_t>(v));
        }
    return m;
}

BasisEval basis_eval(const TetMesh& mesh, int tet, double t0, double t1, int local_node,
                     int layer, const Vec3& x, double t) {
    const auto lam = mesh.barycentric(tet, x);
    for (double l : lam)
        if (l < -1e-10 || l > 1.0 + 1e-10)
            throw InternalError("basis_eval: point outside the prism");
    const double dt = t1 - t0;
    if (t < t0 - 1e-10 * dt || t > t1 + 1e-10 * dt)
        throw InternalError("basis_eval: time outside the prism");
    const auto g = mesh.barycentric_gradients(tet);
    const double th = (layer == 0) ? (t1 - t) / dt : (t - t0) / dt;
    const double dth = (layer == 0) ? -1.0 / dt : 1.0 / dt;
    return {lam[local_node] * th, Vec3(g[local_node] * th), lam[local_node] * dth};
}

BasisEval SlabSolution::eval_in_tet(const TetMesh& mesh, int tet, const Vec3& x,
                                    double t) const {
    const auto lam = mesh.barycentric(tet, x);
    const auto g = mesh.barycentric_gradients(tet);
    const double dt = dofs.t1 - dofs.t0;
    const double th0 = (dofs.t1 - t) / dt, th1 = (t - dofs.t0) / dt;
    BasisEval r{0.0, Vec3::Zero(), 0.0};
    const auto& tv = mesh.tets[tet];
    for (int i = 0; i < 4; ++i) {
        const double cb = coeff_of(tv[i], 0), ct = coeff_of(tv[i], 1);
        const double c = cb * th0 + ct * th1;
        r.value += lam[i] * c;
        r.grad += g[i] * c;
        r.dt += lam[i] * (ct - cb) / dt;
    }
    return r;
}

double SlabSolution::value_in_tet(const TetMesh& mesh, int tet, const Vec3& x,
                                  double t) const {
    const auto lam = mesh.barycentric(tet, x);
    const double dt = dofs.t1 - dofs.t0;
    const double th0 = (dofs.t1 - t) / dt, th1 = (t - dofs.t0) / dt;
    double v = 0.0;
    const auto& tv = mesh.tets[tet];
    for (int i = 0; i < 4; ++i)
        v += lam[i] * (coeff_of(tv[i], 0) * th0 + coeff_of(tv[i], 1) * th1);
    return v;
}

double SlabSolution::value(const TetMesh& mesh, const Vec3& x, double t) const {
    return value_in_tet(mesh, locate_point(mesh, x).tet, x, t);
}

NodalField::NodalField(const TetMesh* mesh, const std::vector<std::int32_t>& tets,
                       const std::function<double(const Vec3&)>& node_value)
    : mesh_(mesh) {
    rank_.assign(mesh->vertices.size(), -1);
    for (auto t : tets)
        for (int i = 0; i < 4; ++i) {
            const int v = mesh->tets[t][i];
            if (rank_[v] < 0) {
                rank_[v] = static_cast<std::int32_t>(values_.size());
                values_.push_back(node_value(mesh->vertices[v]));
            }
        }
}

double NodalField::node_value(int node) const {
    return rank_[node] < 0 ? 0.0 : values_[rank_[node]];
}

double NodalField::value_in_tet(int tet, const Vec3& x) const {
    const auto lam = mesh_->barycentric(tet, x);
    const auto& tv = mesh_->tets[tet];
    double v = 0.0;
    for (int i = 0; i < 4; ++i) v += lam[i] * node_value(tv[i]);
    return v;
}

double NodalField::value(const Vec3& x) const {
    return value_in_tet(locate_point(*mesh_, x).tet, x);
}

Vec3 NodalField::grad_in_tet(int tet, const Vec3& x) const {
    (void)x;
    const auto g = mesh_->barycentric_gradients(tet);
    const auto& tv = mesh_->tets[tet];
    Vec3 r = Vec3::Zero();
    for (int i = 0; i < 4; ++i) r += g[i] * node_value(tv[i]);
    return r;
}

SlabSystem assemble_slab(const TetMesh& mesh, const ProblemDefinition& p,
                         const SlabReconstruction& R, const CrossSection& lower,
                         const PrevEvaluator& prev) {
    if (R.elements.empty())
        throw GeometryError("empty slab reconstruction: the surface left the box or vanished");

    SlabSystem sys;
    sys.dofs = build_dof_map(mesh, R);
    const int nd = sys.dofs.n_dofs();
    const double t0 = R.t0, t1 = R.t1, dtt = t1 - t0;

    using Trip = Eigen::Triplet<double>;
    struct ChunkOut {
        std::vector<Trip> trips;
        std::vector<std::pair<int, double>> rhs;
    };
    const std::size_t NE = R.elements.size();
    constexpr std::size_t chunk = 2048;
    std::vector<ChunkOut> chunks((NE + chunk - 1) / chunk);

    parallel_chunks(NE, chunk, [&](std::size_t ci, std::size_t bgn, std::size_t end) {
        ChunkOut& co = chunks[ci];
        // Elements arrive grouped by parent tet; summing each run into one
        // 8x8 block before emission keeps the triplet list proportional to
        // the number of cut coarse tets instead of the number of elements.
        int run_parent = -1;
        int gdof[8];
        double Ablk[8][8];
        double bblk[8];
        auto flush = [&]() {
            if (run_parent < 0) return;
            for (int i = 0; i < 8; ++i) {
                for (int j = 0; j < 8; ++j) co.trips.emplace_back(gdof[i], gdof[j], Ablk[i][j]);
                co.rhs.emplace_back(gdof[i], bblk[i]);
            }
        };
        for (std::size_t ei = bgn; ei < end; ++ei) {
            const SurfaceElement& e = R.elements[ei];
            const auto& tv = mesh.tets[e.parent_tet];
            const auto g = mesh.barycentric_gradients(e.parent_tet);
            const Vec3& v0 = mesh.vertices[tv[0]];
            if (e.parent_tet != run_parent) {
                flush();
                run_parent = e.parent_tet;
                for (int i = 0; i < 4; ++i) {
                    gdof[2 * i] = sys.dofs.dof(tv[i], 0);
                    gdof[2 * i + 1] = sys.dofs.dof(tv[i], 1);
                }
                for (int i = 0; i < 8; ++i) {
                    for (int j = 0; j < 8; ++j) Ablk[i][j] = 0.0;
                    bblk[i] = 0.0;
                }
            }
            double Aloc[8][8] = {};
            double bloc[8] = {};
            for (const QuadPoint4& q : quadrature(e)) {
                const Vec3 x = q.x.head<3>();
                const double t = q.x[3];
                const double thb = (t1 - t) / dtt, tht = (t - t0) / dtt;
                const SurfaceCoefficients co_q = surface_coefficients(p, x, t, e.n);
                const Vec3 wv = p.velocity(x, t);
                const double fv = p.source(x, t, e.n);
                const double wq = q.w * e.beta;

                double val[8], mat[8];
                Vec3 pg[8];
                for (int i = 0; i < 4; ++i) {
                    const double lam = (i == 0 ? 1.0 : 0.0) + g[i].dot(x - v0);
                    const Vec3 pgrad = g[i] - e.n * e.n.dot(g[i]);
                    const double wgrad = wv.dot(g[i]);
                    val[2 * i] = lam * thb;
                    mat[2 * i] = -lam / dtt + wgrad * thb;
                    pg[2 * i] = pgrad * thb;
                    val[2 * i + 1] = lam * tht;
                    mat[2 * i + 1] = lam / dtt + wgrad * tht;
                    pg[2 * i + 1] = pgrad * tht;
                }
                for (int i = 0; i < 8; ++i) {
                    for (int j = 0; j < 8; ++j)
                        Aloc[i][j] += wq * (mat[j] * val[i] + p.nu * pg[j].dot(pg[i]) +
                                            co_q.alpha * val[j] * val[i]);
                    bloc[i] += wq * fv * val[i];
                }
            }
            for (int i = 0; i < 8; ++i) {
                for (int j = 0; j < 8; ++j) Ablk[i][j] += Aloc[i][j];
                bblk[i] += bloc[i];
            }
        }
        flush();
    });

    std::vector<Trip> trips;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nd);
    for (const auto& co : chunks) {
        trips.insert(trips.end(), co.trips.begin(), co.trips.end());
        for (const auto& [i, v] : co.rhs) b[i] += v;
    }

    // Jump pairing with the previous trace on the lower cross section; only
    // the bottom layer is active there (theta1 vanishes at t0).
    for (const CrossSectionElement& ce : lower.elements) {
        const auto& tv = mesh.tets[ce.parent_tet];
        const auto g = mesh.barycentric_gradients(ce.parent_tet);
        const Vec3& v0 = mesh.vertices[tv[0]];
        int nd4[4];
        for (int i = 0; i < 4; ++i) nd4[i] = sys.dofs.dof(tv[i], 0);
        for (const QuadPoint3& q : quadrature(ce)) {
            double lam[4];
            for (int i = 0; i < 4; ++i)
                lam[i] = (i == 0 ? 1.0 : 0.0) + g[i].dot(q.x - v0);
            const double pv = prev(ce.parent_tet, q.x);
            for (int i = 0; i < 4; ++i) {
                if (nd4[i] < 0) continue;
                for (int j = 0; j < 4; ++j)
                    if (nd4[j] >= 0) trips.emplace_back(nd4[i], nd4[j], q.w * (lam[i] * lam[j]));
                b[nd4[i]] += q.w * pv * lam[i];
            }
        }
    }

    sys.A.resize(nd, nd);
    sys.A.setFromTriplets(trips.begin(), trips.end());
    sys.b = std::move(b);
    return sys;
}

Eigen::SparseMatrix<double> cross_section_mass(const TetMesh& mesh, const CrossSection& cs,
                                               const TraceDofMap& dofs) {
    std::vector<Eigen::Triplet<double>> trips;
    for (const CrossSectionElement& ce : cs.elements) {
        const auto& tv = mesh.tets[ce.parent_tet];
        const auto g = mesh.barycentric_gradients(ce.parent_tet);
        const Vec3& v0 = mesh.vertices[tv[0]];
        int nd4[4];
        for (int i = 0; i < 4; ++i) nd4[i] = dofs.dof(tv[i], 0);
        for (const QuadPoint3& q : quadrature(ce)) {
            double lam[4];
            for (int i = 0; i < 4; ++i)
                lam[i] = (i == 0 ? 1.0 : 0.0) + g[i].dot(q.x - v0);
            for (int i = 0; i < 4; ++i) {
                if (nd4[i] < 0) continue;
                for (int j = 0; j < 4; ++j)
                    if (nd4[j] >= 0) trips.emplace_back(nd4[i], nd4[j], q.w * (lam[i] * lam[j]));
            }
        }
    }
    Eigen::SparseMatrix<double> M(dofs.n_dofs(), dofs.n_dofs());
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

EnergyReport energy_check(const SlabGeometry& geo, const ProblemDefinition& p,
                          const std::vector<SlabSolution>& sols, double c0) {
    if (!(c0 > 0.0)) throw ConfigError("energy check needs c0 > 0");
    if (sols.empty()) throw ConfigError("energy check needs at least one slab solution");
    const TetMesh& mesh = geo.coarse();

    double udot_u = 0.0, a_uu = 0.0, d_uu = 0.0, h_norm2 = 0.0, jumps2 = 0.0;
    for (std::size_t k = 0; k < sols.size(); ++k) {
        const SlabSolution& u = sols[k];
        const int n = static_cast<int>(k) + 1;
        const SlabReconstruction R = geo.reconstruct_slab(n);
        for (const SurfaceElement& e : R.elements) {
            for (const QuadPoint4& q : quadrature(e)) {
                const Vec3 x = q.x.head<3>();
                const double t = q.x[3];
                const SurfaceCoefficients co = surface_coefficients(p, x, t, e.n);
                if (std::abs(p.source(x, t, e.n)) > 1e-12)
                    throw ConfigError("energy check requires a zero source term");
                if (co.alpha - 0.5 * co.div_gamma_w < c0 - 1e-9)
                    throw ConfigError(
                        "energy check requires alpha - div_gamma_w/2 >= c0 on the surface");
                const BasisEval ue = u.eval_in_tet(mesh, e.parent_tet, x, t);
                const Vec3 pg = ue.grad - e.n * e.n.dot(ue.grad);
                const double wq = q.w * e.beta;
                udot_u += wq * (ue.dt + p.velocity(x, t).dot(ue.grad)) * ue.value;
                a_uu += wq * (p.nu * pg.squaredNorm() + co.alpha * ue.value * ue.value);
                h_norm2 += wq * (ue.value * ue.value + pg.squaredNorm());
            }
        }
        const CrossSection lower = geo.cross_section_lower(n);
        for (const CrossSectionElement& ce : lower.elements) {
            for (const QuadPoint3& q : quadrature(ce)) {
                const double up = u.value_in_tet(mesh, ce.parent_tet, q.x, R.t0);
                const double um =
                    (k == 0) ? 0.0 : sols[k - 1].value_in_tet(mesh, ce.parent_tet, q.x, R.t0);
                const double jump = up - um;
                d_uu += q.w * jump * up;
                jumps2 += q.w * jump * jump;
            }
        }
    }

    const CrossSection top = geo.cross_section_upper(static_cast<int>(sols.size()));
    double final2 = 0.0;
    for (const CrossSectionElement& ce : top.elements)
        for (const QuadPoint3& q : quadrature(ce)) {
            const double v = sols.back().value_in_tet(mesh, ce.parent_tet, q.x, top.t);
            final2 += q.w * v * v;
        }

    EnergyReport rep;
    rep.energy = udot_u + a_uu + d_uu;
    rep.lower_bound = std::min(1.0, c0) * (p.nu * h_norm2 + 0.5 * final2 + 0.5 * jumps2);
    rep.margin = rep.energy - rep.lower_bound;
    return rep;
}

}  // namespace sttrace
