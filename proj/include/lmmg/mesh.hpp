#pragma once

#include <array>
#include <memory>
#include <vector>

#include <lmmg/geometry.hpp>

namespace lmmg {

/// Conforming triangle mesh with the bookkeeping needed for newest-vertex
/// bisection.
///
/// Conventions:
///  - elements store vertex ids counterclockwise;
///  - local edge k of an element is the edge opposite local vertex k, i.e.
///    (v[(k+1)%3], v[(k+2)%3]);
///  - every element carries the local index of its refinement edge.
///
/// Meshes are immutable once built.  refine() produces a new mesh that keeps
/// a link to its parent: the first parent->n_vertices() vertices of the
/// child coincide with the parent's vertices, and every vertex created by
/// refinement records the two parent vertices whose midpoint it is.  These
/// links are what nodal transfer between nested spaces relies on.
class Triangulation {
public:
    /// Builds a generation-0 mesh.  Boundary vertices are detected from the
    /// edge structure (an edge with a single adjacent element is a boundary
    /// edge) and each refinement edge is set to the longest edge, ties
    /// broken toward the smallest opposite local vertex index.  Elements
    /// with negative orientation are reordered; degenerate ones are
    /// rejected.
    Triangulation(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements);

    /// Same as above but with prescribed boundary flags (used by the mesh
    /// file reader, where flags are part of the format).
    Triangulation(std::vector<Vec2> vertices,
                  std::vector<std::array<int, 3>> elements,
                  std::vector<char> boundary_vertex);

    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_elements() const { return static_cast<int>(elements_.size()); }

    Vec2 vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& element(int e) const { return elements_[e]; }
    int refinement_edge(int e) const { return refinement_edge_[e]; }
    bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }

    int generation() const { return generation_; }

    /// Element id in the parent mesh this element descends from (its own id
    /// copy for elements that were not bisected); -1 on generation 0.
    int parent_of(int e) const { return parent_of_[e]; }

    /// The mesh this one was refined from; null on generation 0.
    const std::shared_ptr<const Triangulation>& parent_mesh() const { return parent_; }

    /// For a vertex created by refinement, the two parent-mesh vertex ids
    /// whose midpoint it is; {-1, -1} for vertices inherited from the
    /// parent (and for all vertices of a generation-0 mesh).
    std::array<int, 2> midpoint_parents(int v) const { return midpoint_parents_[v]; }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& elements() const { return elements_; }

private:
    Triangulation() = default;

    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> elements_;
    std::vector<int> refinement_edge_;
    std::vector<char> boundary_vertex_;
    std::vector<int> parent_of_;
    std::vector<std::array<int, 2>> midpoint_parents_;
    std::shared_ptr<const Triangulation> parent_;
    int generation_ = 0;

    friend std::shared_ptr<const Triangulation> refine(std::shared_ptr<const Triangulation>,
                                                       const std::vector<int>&);
};

using MeshPtr = std::shared_ptr<const Triangulation>;

/// Edge-based connectivity derived from a mesh.  Each undirected edge knows
/// its endpoints and at most two (element, local edge) incidences; boundary
/// edges have elem[1] == -1.
struct EdgeTable {
    struct Edge {
        int v0 = -1;
        int v1 = -1;
        std::array<int, 2> elem = {-1, -1};
        std::array<int, 2> local = {-1, -1};

        bool on_boundary() const { return elem[1] < 0; }
    };

    std::vector<Edge> edges;
    std::vector<std::array<int, 3>> element_edges; ///< per element: local edge k -> edge id

    explicit EdgeTable(const Triangulation& mesh);
};

/// Per-element geometry used by assembly and the error indicators.
struct ElementGeometry {
    std::array<Vec2, 3> corner;
    double area = 0.0;
    double diameter = 0.0;            ///< longest edge
    std::array<double, 3> edge_length; ///< local edge k (opposite vertex k)
    std::array<Vec2, 3> basis_gradient; ///< gradient of the barycentric coordinate of vertex k
};

ElementGeometry element_geometry(const Triangulation& mesh, int e);

struct MeshStatistics {
    long elements = 0;
    double min_angle = 0.0;    ///< smallest interior angle over all elements, radians
    double max_diameter = 0.0; ///< largest element diameter
};

MeshStatistics mesh_statistics(const Triangulation& mesh);

/// Uniform triangulation of the axis-aligned rectangle [lo.x, hi.x] x
/// [lo.y, hi.y]: divisions x divisions congruent cells, each split along
/// the lower-left to upper-right diagonal, giving 2*divisions^2 elements.
MeshPtr create_square_mesh(Vec2 lo, Vec2 hi, int divisions);

/// Newest-vertex bisection of the marked elements plus the closure needed
/// to stay conforming.  Each marked element is bisected at its refinement
/// edge; midpoints are shared through the edge structure, so the result is
/// again conforming.  An empty marking reproduces the mesh (one generation
/// up).  Invalid element ids are rejected.
MeshPtr refine(MeshPtr mesh, const std::vector<int>& marked_elements);

} // namespace lmmg
