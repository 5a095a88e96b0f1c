#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "sttrace/mesh.hpp"
#include "sttrace/problems.hpp"

namespace sttrace {

/// 4D prism: a spatial tet extruded over [t0,t1]. Spatial vertices are sorted
/// by global index; keys[] are the global space-time vertex keys (bottom layer
/// 0..3, top layer 4..7) that drive all tie-breaking rules.
struct Prism4 {
    std::array<Vec3, 4> verts;
    double t0 = 0.0, t1 = 1.0;
    std::array<std::int64_t, 8> keys{0, 1, 2, 3, 4, 5, 6, 7};
};

/// 4-simplex with global vertex keys.
struct Pentatope {
    std::array<Vec4, 5> v;
    std::array<std::int64_t, 5> keys;
    double volume() const;
};

/// Splits the prism into the four path pentatopes
///   P_k = conv{(v_0,t0),...,(v_k,t0),(v_k,t1),...,(v_3,t1)}.
/// Sorted vertex order makes the induced facet subdivision agree between
/// face-adjacent prisms.
std::array<Pentatope, 4> subdivide_prism(const Prism4& prism);

/// A 3-simplex of the reconstructed space-time manifold, embedded in R^4
/// (coordinates x,y,z,t).
struct SurfaceElement {
    std::array<Vec4, 4> v;
    std::int32_t parent_tet = -1;  // coarse background tet owning the element
    double m3 = 0.0;               // 3-measure
    Vec4 nu;                       // space-time unit normal, toward increasing phi
    Vec3 n;                        // spatial unit normal
    double beta = 1.0;             // |grad_x phi| / |grad_(x,t) phi| on the pentatope
};

/// Marches the affine interpolant of phi over one pentatope and appends the
/// pieces of its zero level to out (0, 1 or 3 simplices). Zero vertex values
/// count as positive. Crossing points sit at x_a + phi_a/(phi_a-phi_b)(x_b-x_a);
/// the six-crossing case is split into three simplices with every quadrilateral
/// face triangulated along the diagonal through its lowest-key vertex, so
/// face-adjacent pentatopes tile the shared facet identically. Only structurally
/// degenerate simplices (repeated crossing keys) are dropped. When vertex_keys
/// is given, each emitted
/// simplex appends its four crossing-edge keys (for connectivity checks).
void march_pentatope(const Pentatope& P, const std::array<double, 5>& phi,
                     std::int32_t parent_tet, std::vector<SurfaceElement>& out,
                     std::vector<std::array<std::int64_t, 4>>* vertex_keys = nullptr);

/// Triangle of a fixed-time cross section of the reconstructed manifold.
struct CrossSectionElement {
    std::array<Vec3, 3> v;
    std::int32_t parent_tet = -1;
    double area = 0.0;
    std::array<std::int64_t, 3> vertex_keys{};  // crossing-edge keys, for dedup
};

struct SlabReconstruction {
    int slab = 0;
    double t0 = 0.0, t1 = 0.0;
    std::vector<SurfaceElement> elements;  // grouped by parent_tet, ascending
    /// Per-element crossing-edge keys; filled only when requested.
    std::vector<std::array<std::int64_t, 4>> vertex_keys;
};

struct CrossSection {
    double t = 0.0;
    std::vector<CrossSectionElement> elements;  // grouped by parent_tet, ascending
};

struct ReconstructionOptions {
    bool store_vertex_keys = false;
};

/// Degree-2 quadrature.
struct QuadPoint4 {
    Vec4 x;
    double w;
};
struct QuadPoint3 {
    Vec3 x;
    double w;
};
/// Four interior points, exact for quadratics on the 3-simplex.
std::array<QuadPoint4, 4> quadrature(const SurfaceElement& e);
/// Three edge midpoints, exact for quadratics on the triangle.
std::array<QuadPoint3, 3> quadrature(const CrossSectionElement& e);

/// Samples phi(.,t) at every mesh vertex.
std::vector<double> sample_level_set(const TetMesh& mesh, const ProblemDefinition& p,
                                     double t);

/// Reconstruction engine for one (mesh, problem, time grid) triple. Works on
/// the once-refined mesh (spatial size h/2, temporal step dt/2); each refined
/// tet nests inside exactly one coarse tet, which becomes the parent of every
/// element cut from it.
class SlabGeometry {
public:
    SlabGeometry(const TetMesh* coarse, const ProblemDefinition* problem, TimeGrid grid);

    const TetMesh& coarse() const { return *coarse_; }
    const TetMesh& refined() const { return refined_; }
    const TimeGrid& grid() const { return grid_; }
    int parent_of_refined_tet(int rt) const { return parent_[rt]; }

    /// Reconstructs the space-time manifold piece over slab n (1-based).
    /// Raises GeometryError when the surface touches the box boundary.
    SlabReconstruction reconstruct_slab(int n, const ReconstructionOptions& opts = {}) const;

    /// Cross section at the lower/upper end of slab n, from that slab's
    /// interpolant data.
    CrossSection cross_section_lower(int n) const { return cross_section_at(grid_.t(n - 1)); }
    CrossSection cross_section_upper(int n) const { return cross_section_at(grid_.t(n)); }
    CrossSection cross_section_at(double t) const;

private:
    const TetMesh* coarse_;
    const ProblemDefinition* problem_;
    TimeGrid grid_;
    TetMesh refined_;
    std::vector<std::int32_t> parent_;
};

}  // namespace sttrace
