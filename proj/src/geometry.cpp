#include "sttrace/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sttrace/parallel.hpp"

namespace sttrace {

namespace {

std::int64_t pack_edge_key(std::int64_t a, std::int64_t b) {
    if (a > b) std::swap(a, b);
    return ((a + 1) << 31) | b;
}

struct Crossing {
    Vec4 x;
    std::int64_t key;
};

double simplex3_measure(const std::array<Vec4, 4>& p) {
    Eigen::Matrix<double, 4, 3> M;
    M.col(0) = p[1] - p[0];
    M.col(1) = p[2] - p[0];
    M.col(2) = p[3] - p[0];
    const double g = (M.transpose() * M).determinant();
    return g > 0.0 ? std::sqrt(g) / 6.0 : 0.0;
}

Vec4 affine_gradient(const Pentatope& P, const std::array<double, 5>& phi) {
    Eigen::Matrix4d M;
    Vec4 rhs;
    for (int i = 1; i < 5; ++i) {
        M.row(i - 1) = (P.v[i] - P.v[0]).transpose();
        rhs[i - 1] = phi[i] - phi[0];
    }
    return M.partialPivLu().solve(rhs);
}

}  // namespace

double Pentatope::volume() const {
    Eigen::Matrix4d M;
    for (int i = 1; i < 5; ++i) M.col(i - 1) = v[i] - v[0];
    return std::abs(M.determinant()) / 24.0;
}

std::array<Pentatope, 4> subdivide_prism(const Prism4& prism) {
    auto v4 = [&](int i, bool top) {
        Vec4 x;
        x.head<3>() = prism.verts[i];
        x[3] = top ? prism.t1 : prism.t0;
        return x;
    };
    std::array<Pentatope, 4> out;
    for (int k = 0; k < 4; ++k) {
        Pentatope& P = out[k];
        int m = 0;
        for (int i = 0; i <= k; ++i, ++m) {
            P.v[m] = v4(i, false);
            P.keys[m] = prism.keys[i];
        }
        for (int i = k; i < 4; ++i, ++m) {
            P.v[m] = v4(i, true);
            P.keys[m] = prism.keys[4 + i];
        }
    }
    return out;
}

void march_pentatope(const Pentatope& P, const std::array<double, 5>& phi,
                     std::int32_t parent_tet, std::vector<SurfaceElement>& out,
                     std::vector<std::array<std::int64_t, 4>>* vertex_keys) {
    int neg[5], pos[5], nn = 0, np = 0;
    for (int i = 0; i < 5; ++i)
        (phi[i] < 0.0 ? neg[nn++] : pos[np++]) = i;
    if (nn == 0 || nn == 5) return;

    const Vec4 g = affine_gradient(P, phi);
    const double gn = g.norm();
    const Vec3 gx = g.head<3>();
    const double gxn = gx.norm();
    // A vanishing spatial gradient means an instantaneous time slice; its
    // measure factor beta is zero, so it contributes nothing anywhere.
    if (!(gn > 0.0) || gxn <= 1e-14 * gn) return;
    const Vec4 nu = g / gn;
    const Vec3 n = gx / gxn;
    const double beta = gxn / gn;

    auto crossing = [&](int i, int j) {
        // An exactly-zero endpoint (zeros count positive) puts the crossing on
        // the node itself; it must carry the node's key, not an edge key, so
        // every pentatope that touches the node agrees on it.
        if (phi[i] == 0.0) return Crossing{P.v[i], P.keys[i]};
        if (phi[j] == 0.0) return Crossing{P.v[j], P.keys[j]};
        const double s = phi[i] / (phi[i] - phi[j]);
        return Crossing{P.v[i] + s * (P.v[j] - P.v[i]), pack_edge_key(P.keys[i], P.keys[j])};
    };
    auto emit = [&](const Crossing& a, const Crossing& b, const Crossing& c,
                    const Crossing& d) {
        // Only structurally degenerate simplices (two crossings canonicalized
        // onto the same vertex key) may be dropped: any simplex with four
        // distinct crossings has a twin across each pentatope wall, and
        // removing one side of such a pair would open a hole in the
        // reconstructed manifold even when its measure underflows to zero.
        const std::array<std::int64_t, 4> ks{a.key, b.key, c.key, d.key};
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (ks[i] == ks[j]) return;
        SurfaceElement e;
        e.v = {a.x, b.x, c.x, d.x};
        e.m3 = simplex3_measure(e.v);
        e.parent_tet = parent_tet;
        e.nu = nu;
        e.n = n;
        e.beta = beta;
        out.push_back(e);
        if (vertex_keys) vertex_keys->push_back({a.key, b.key, c.key, d.key});
    };

    if (nn == 1 || np == 1) {
        const int lone = (nn == 1) ? neg[0] : pos[0];
        const int* other = (nn == 1) ? pos : neg;
        emit(crossing(lone, other[0]), crossing(lone, other[1]), crossing(lone, other[2]),
             crossing(lone, other[3]));
        return;
    }

    // Two vertices on one side, three on the other: the section is a
    // triangular prism with columns indexed by the three-vertex side.
    const int* pair = (nn == 2) ? neg : pos;
    const int* tri = (nn == 2) ? pos : neg;
    Crossing A[3], B[3];
    for (int j = 0; j < 3; ++j) {
        A[j] = crossing(pair[0], tri[j]);
        B[j] = crossing(pair[1], tri[j]);
    }
    // Bring the lowest-key vertex to A0; its two quads then use diagonals
    // through it, matching the per-quad lowest-key rule.
    int mc = 0;
    bool min_in_B = false;
    std::int64_t mk = A[0].key;
    for (int j = 0; j < 3; ++j) {
        if (A[j].key < mk) { mk = A[j].key; mc = j; min_in_B = false; }
        if (B[j].key < mk) { mk = B[j].key; mc = j; min_in_B = true; }
    }
    if (min_in_B)
        for (int j = 0; j < 3; ++j) std::swap(A[j], B[j]);
    std::rotate(A, A + mc, A + 3);
    std::rotate(B, B + mc, B + 3);
    // Remaining quad {A1,A2,B2,B1}: diagonal through its lowest-key vertex.
    if (std::min(A[2].key, B[1].key) < std::min(A[1].key, B[2].key)) {
        std::swap(A[1], A[2]);
        std::swap(B[1], B[2]);
    }
    emit(A[0], A[1], A[2], B[2]);
    emit(A[0], A[1], B[2], B[1]);
    emit(A[0], B[1], B[2], B[0]);
}

std::array<QuadPoint4, 4> quadrature(const SurfaceElement& e) {
    constexpr double a = 0.5854101966249685;  // (5+3*sqrt(5))/20
    constexpr double b = 0.1381966011250105;  // (5-sqrt(5))/20
    std::array<QuadPoint4, 4> q;
    const double w = e.m3 / 4.0;
    for (int k = 0; k < 4; ++k) {
        Vec4 x = Vec4::Zero();
        for (int i = 0; i < 4; ++i) x += (i == k ? a : b) * e.v[i];
        q[k] = {x, w};
    }
    return q;
}

std::array<QuadPoint3, 3> quadrature(const CrossSectionElement& e) {
    const double w = e.area / 3.0;
    return {QuadPoint3{0.5 * (e.v[0] + e.v[1]), w}, QuadPoint3{0.5 * (e.v[0] + e.v[2]), w},
            QuadPoint3{0.5 * (e.v[1] + e.v[2]), w}};
}

std::vector<double> sample_level_set(const TetMesh& mesh, const ProblemDefinition& p,
                                     double t) {
    std::vector<double> vals(mesh.vertices.size());
    parallel_chunks(vals.size(), 8192, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) vals[i] = p.level_set(mesh.vertices[i], t);
    });
    return vals;
}

SlabGeometry::SlabGeometry(const TetMesh* coarse, const ProblemDefinition* problem,
                           TimeGrid grid)
    : coarse_(coarse),
      problem_(problem),
      grid_(grid),
      refined_(build_box_mesh(coarse->box, coarse->h / 2.0)) {
    if (3 * static_cast<std::int64_t>(refined_.vertices.size()) >= (std::int64_t(1) << 31))
        throw ConfigError("mesh too fine for 31-bit space-time vertex keys");
    parent_.resize(refined_.tets.size());
    parallel_chunks(refined_.tets.size(), 16384,
                    [&](std::size_t, std::size_t b, std::size_t e) {
                        for (std::size_t rt = b; rt < e; ++rt) {
                            const auto& tv = refined_.tets[rt];
                            Vec3 c = 0.25 * (refined_.vertices[tv[0]] + refined_.vertices[tv[1]] +
                                             refined_.vertices[tv[2]] + refined_.vertices[tv[3]]);
                            parent_[rt] = locate_point(*coarse_, c).tet;
                        }
                    });
}

namespace {

template <class Elem, class Keys>
void sort_by_parent(std::vector<Elem>& elems, Keys* keys) {
    std::vector<std::size_t> order(elems.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return elems[a].parent_tet < elems[b].parent_tet;
    });
    std::vector<Elem> se;
    se.reserve(elems.size());
    for (auto i : order) se.push_back(elems[i]);
    elems = std::move(se);
    if (keys && !keys->empty()) {
        Keys sk;
        sk.reserve(keys->size());
        for (auto i : order) sk.push_back((*keys)[i]);
        *keys = std::move(sk);
    }
}

}  // namespace

SlabReconstruction SlabGeometry::reconstruct_slab(int n, const ReconstructionOptions& opts) const {
    SlabReconstruction R;
    R.slab = n;
    R.t0 = grid_.t(n - 1);
    R.t1 = grid_.t(n);
    const double tm = R.t0 + 0.5 * grid_.dt;

    const std::array<std::vector<double>, 3> f = {
        sample_level_set(refined_, *problem_, R.t0),
        sample_level_set(refined_, *problem_, tm),
        sample_level_set(refined_, *problem_, R.t1)};
    const std::int64_t NV = static_cast<std::int64_t>(refined_.vertices.size());

    struct ChunkOut {
        std::vector<SurfaceElement> elems;
        std::vector<std::array<std::int64_t, 4>> keys;
        bool boundary_touch = false;
    };
    const std::size_t NT = refined_.tets.size();
    constexpr std::size_t chunk = 16384;
    std::vector<ChunkOut> chunks((NT + chunk - 1) / chunk);

    parallel_chunks(NT, chunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
        ChunkOut& co = chunks[ci];
        auto* keys_out = opts.store_vertex_keys ? &co.keys : nullptr;
        for (std::size_t rt = b; rt < e; ++rt) {
            const auto& tv = refined_.tets[rt];
            for (int sub = 0; sub < 2; ++sub) {
                const auto& fa = f[sub];
                const auto& fb = f[sub + 1];
                int negcnt = 0;
                for (int i = 0; i < 4; ++i) {
                    negcnt += (fa[tv[i]] < 0.0);
                    negcnt += (fb[tv[i]] < 0.0);
                }
                if (negcnt == 0 || negcnt == 8) continue;
                if (refined_.boundary_cell(refined_.cell_of_tet(static_cast<int>(rt)))) {
                    co.boundary_touch = true;
                    continue;
                }
                Prism4 pr;
                pr.t0 = (sub == 0) ? R.t0 : tm;
                pr.t1 = (sub == 0) ? tm : R.t1;
                for (int i = 0; i < 4; ++i) {
                    pr.verts[i] = refined_.vertices[tv[i]];
                    pr.keys[i] = static_cast<std::int64_t>(sub) * NV + tv[i];
                    pr.keys[4 + i] = static_cast<std::int64_t>(sub + 1) * NV + tv[i];
                }
                for (const Pentatope& P : subdivide_prism(pr)) {
                    std::array<double, 5> pphi;
                    for (int i = 0; i < 5; ++i)
                        pphi[i] = f[P.keys[i] / NV][P.keys[i] % NV];
                    march_pentatope(P, pphi, parent_[rt], co.elems, keys_out);
                }
            }
        }
    });

    std::size_t total = 0;
    for (const auto& co : chunks) {
        if (co.boundary_touch)
            throw GeometryError("surface touches the background box boundary");
        total += co.elems.size();
    }
    R.elements.reserve(total);
    R.vertex_keys.reserve(opts.store_vertex_keys ? total : 0);
    for (auto& co : chunks) {
        R.elements.insert(R.elements.end(), co.elems.begin(), co.elems.end());
        R.vertex_keys.insert(R.vertex_keys.end(), co.keys.begin(), co.keys.end());
        co.elems = {};
        co.keys = {};
    }
    sort_by_parent(R.elements, opts.store_vertex_keys ? &R.vertex_keys : nullptr);
    return R;
}

namespace {

void march_tet_slice(const std::array<Vec3, 4>& verts,
                     const std::array<std::int32_t, 4>& vids,
                     const std::array<double, 4>& phi, std::int32_t parent,
                     std::vector<CrossSectionElement>& out) {
    int neg[4], pos[4], nn = 0, np = 0;
    for (int i = 0; i < 4; ++i)
        (phi[i] < 0.0 ? neg[nn++] : pos[np++]) = i;
    if (nn == 0 || nn == 4) return;

    struct C3 {
        Vec3 x;
        std::int64_t key;
    };
    auto crossing = [&](int i, int j) {
        if (phi[i] == 0.0) return C3{verts[i], vids[i]};
        if (phi[j] == 0.0) return C3{verts[j], vids[j]};
        const double s = phi[i] / (phi[i] - phi[j]);
        return C3{verts[i] + s * (verts[j] - verts[i]), pack_edge_key(vids[i], vids[j])};
    };
    auto emit = [&](const C3& a, const C3& b, const C3& c) {
        if (a.key == b.key || a.key == c.key || b.key == c.key) return;
        CrossSectionElement e;
        e.v = {a.x, b.x, c.x};
        e.area = 0.5 * (e.v[1] - e.v[0]).cross(e.v[2] - e.v[0]).norm();
        e.parent_tet = parent;
        e.vertex_keys = {a.key, b.key, c.key};
        out.push_back(e);
    };

    if (nn == 1 || np == 1) {
        const int lone = (nn == 1) ? neg[0] : pos[0];
        const int* other = (nn == 1) ? pos : neg;
        emit(crossing(lone, other[0]), crossing(lone, other[1]), crossing(lone, other[2]));
        return;
    }
    // 2|2: planar quad, diagonal through its lowest-key vertex.
    const C3 c00 = crossing(neg[0], pos[0]), c01 = crossing(neg[0], pos[1]),
             c11 = crossing(neg[1], pos[1]), c10 = crossing(neg[1], pos[0]);
    if (std::min(c00.key, c11.key) < std::min(c01.key, c10.key)) {
        emit(c00, c01, c11);
        emit(c00, c11, c10);
    } else {
        emit(c01, c11, c10);
        emit(c01, c10, c00);
    }
}

}  // namespace

CrossSection SlabGeometry::cross_section_at(double t) const {
    CrossSection cs;
    cs.t = t;
    const std::vector<double> f = sample_level_set(refined_, *problem_, t);

    struct ChunkOut {
        std::vector<CrossSectionElement> elems;
        bool boundary_touch = false;
    };
    const std::size_t NT = refined_.tets.size();
    constexpr std::size_t chunk = 16384;
    std::vector<ChunkOut> chunks((NT + chunk - 1) / chunk);

    parallel_chunks(NT, chunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
        ChunkOut& co = chunks[ci];
        for (std::size_t rt = b; rt < e; ++rt) {
            const auto& tv = refined_.tets[rt];
            const std::array<double, 4> phi = {f[tv[0]], f[tv[1]], f[tv[2]], f[tv[3]]};
            int negcnt = 0;
            for (double v : phi) negcnt += (v < 0.0);
            if (negcnt == 0 || negcnt == 4) continue;
            if (refined_.boundary_cell(refined_.cell_of_tet(static_cast<int>(rt)))) {
                co.boundary_touch = true;
                continue;
            }
            const std::array<Vec3, 4> verts = {refined_.vertices[tv[0]], refined_.vertices[tv[1]],
                                               refined_.vertices[tv[2]], refined_.vertices[tv[3]]};
            march_tet_slice(verts, tv, phi, parent_[rt], co.elems);
        }
    });

    for (const auto& co : chunks) {
        if (co.boundary_touch)
            throw GeometryError("surface touches the background box boundary");
        cs.elements.insert(cs.elements.end(), co.elems.begin(), co.elems.end());
    }
    sort_by_parent(cs.elements, static_cast<std::vector<std::array<std::int64_t, 4>>*>(nullptr));
    return cs;
}

}  // namespace sttrace
