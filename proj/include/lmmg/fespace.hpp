#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <lmmg/mesh.hpp>
#include <lmmg/quadrature.hpp>
#include <lmmg/sparse.hpp>

namespace lmmg {

/// Whether vertices on the boundary carry degrees of freedom.  Solver code
/// uses zero_boundary (homogeneous Dirichlet conditions are imposed by
/// eliminating boundary vertices); all_free exists so small assembly
/// results can be inspected without the elimination, mostly in tests.
enum class DofMode { zero_boundary, all_free };

/// Piecewise-linear (P1) finite element space on a triangulation.  Degrees
/// of freedom are the included vertices in vertex-id order, which keeps the
/// numbering deterministic across runs.
class FeSpace {
public:
    explicit FeSpace(MeshPtr mesh, DofMode mode = DofMode::zero_boundary);

    const Triangulation& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    DofMode mode() const { return mode_; }

    int n_dofs() const { return static_cast<int>(dof_to_vertex_.size()); }

    int dof_of_vertex(int v) const { return vertex_to_dof_[v]; } ///< -1 when constrained
    int vertex_of_dof(int d) const { return dof_to_vertex_[d]; }

    /// Dof ids of the three element vertices (-1 for constrained ones).
    std::array<int, 3> element_dofs(int e) const;

    /// Cached geometry of element e.
    const ElementGeometry& geometry(int e) const { return geometry_[e]; }

private:
    MeshPtr mesh_;
    DofMode mode_;
    std::vector<int> vertex_to_dof_;
    std::vector<int> dof_to_vertex_;
    std::vector<ElementGeometry> geometry_;
};

using SpacePtr = std::shared_ptr<const FeSpace>;

/// A P1 function given by its coefficient on every degree of freedom of a
/// space; constrained vertices take the value 0.
struct FeFunction {
    SpacePtr space;
    Vector coeffs;
};

FeFunction zero_function(SpacePtr space);

/// Values at all mesh vertices (0 on constrained ones).
Vector vertex_values(const FeFunction& u);

/// Stiffness matrix: entries integral of grad(phi_i) . grad(phi_j).
SparseMatrix assemble_stiffness(const FeSpace& space);

/// Weighted mass matrix: entries integral of w(x) phi_i phi_j, computed
/// with a rule of the given exactness degree.
SparseMatrix assemble_mass(const FeSpace& space,
                           const std::function<double(Vec2)>& weight,
                           int quadrature_degree);

/// Gram matrix of the inner product eps (grad u, grad v) + nu (u, v); the
/// constant-coefficient mass block is integrated exactly.
SparseMatrix assemble_gram(const FeSpace& space, double eps, double nu);

/// Coefficients of the nodal interpolant: g evaluated at every free vertex.
FeFunction nodal_interpolant(SpacePtr space, const std::function<double(Vec2)>& g);

/// Exact transfer of u onto a space whose mesh descends from u's mesh
/// through refine().  P1 spaces are nested, so this is representation, not
/// approximation: vertices inherited from the parent keep their value and
/// each refinement vertex takes the mean of the two vertices it bisects.
FeFunction prolongate(const FeFunction& u, SpacePtr child_space);

/// Point evaluation by element location; points outside the mesh are
/// rejected.  For repeated evaluation construct a PointLocator once.
double evaluate(const FeFunction& u, Vec2 p);

/// Uniform-grid bucket index over element bounding boxes for point
/// location in O(1) per query on shape-regular meshes.
class PointLocator {
public:
    explicit PointLocator(MeshPtr mesh);

    /// Element containing p (lowest id when p lies on a shared edge), or -1.
    int locate(Vec2 p) const;

    const MeshPtr& mesh_ptr() const { return mesh_; }

private:
    MeshPtr mesh_;
    Vec2 lo_, hi_;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;
};

double evaluate(const FeFunction& u, const PointLocator& locator, Vec2 p);

/// Nodal interpolation of source onto the target space.  Falls back to
/// exact prolongation when the meshes are nested; otherwise evaluates
/// through a point locator, which requires the target vertices to lie
/// inside the source mesh.
FeFunction interpolate_onto(const FeFunction& source, SpacePtr target);

/// Quadrature of a pointwise integrand over the whole mesh.
double integrate(const FeSpace& space, int quadrature_degree,
                 const std::function<double(Vec2)>& integrand);

/// Same, with the P1 value of u passed alongside the point.
double integrate(const FeFunction& u, int quadrature_degree,
                 const std::function<double(Vec2, double)>& integrand);

} // namespace lmmg
