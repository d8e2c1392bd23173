#include <lmmg/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <lmmg/errors.hpp>

namespace lmmg {
namespace {

void validate_elements(int n_vertices, const std::vector<std::array<int, 3>>& elements)
{
    if (n_vertices < 3)
        throw InvalidInput("triangulation needs at least 3 vertices");
    if (elements.empty())
        throw InvalidInput("triangulation needs at least 1 element");
    for (const auto& el : elements) {
        for (int v : el)
            if (v < 0 || v >= n_vertices)
                throw InvalidInput("element references vertex " + std::to_string(v)
                                   + " outside [0, " + std::to_string(n_vertices) + ")");
        if (el[0] == el[1] || el[1] == el[2] || el[0] == el[2])
            throw InvalidInput("element with repeated vertices");
    }
}

void orient_positively(const std::vector<Vec2>& vertices, std::vector<std::array<int, 3>>& elements)
{
    for (auto& el : elements) {
        const double doubled_area = cross(vertices[el[0]], vertices[el[1]], vertices[el[2]]);
        if (doubled_area == 0.0)
            throw InvalidInput("degenerate (zero area) element");
        if (doubled_area < 0.0)
            std::swap(el[1], el[2]);
    }
}

int longest_edge(const std::vector<Vec2>& vertices, const std::array<int, 3>& el)
{
    int best = 0;
    double best_length = -1.0;
    for (int k = 0; k < 3; ++k) {
        const double length =
            distance(vertices[el[(k + 1) % 3]], vertices[el[(k + 2) % 3]]);
        if (length > best_length) {
            best_length = length;
            best = k;
        }
    }
    return best;
}

struct RawEdges {
    std::vector<EdgeTable::Edge> edges;
    std::vector<std::array<int, 3>> element_edges;
};

RawEdges build_edges(int n_vertices, const std::vector<std::array<int, 3>>& elements)
{
    RawEdges result;
    result.element_edges.resize(elements.size());
    std::unordered_map<long long, int> edge_of_pair;
    edge_of_pair.reserve(2 * elements.size());

    for (int e = 0; e < static_cast<int>(elements.size()); ++e) {
        for (int k = 0; k < 3; ++k) {
            int a = elements[e][(k + 1) % 3];
            int b = elements[e][(k + 2) % 3];
            if (a > b)
                std::swap(a, b);
            const long long key = static_cast<long long>(a) * n_vertices + b;
            auto [it, inserted] = edge_of_pair.try_emplace(key, static_cast<int>(result.edges.size()));
            if (inserted) {
                EdgeTable::Edge edge;
                edge.v0 = a;
                edge.v1 = b;
                result.edges.push_back(edge);
            }
            EdgeTable::Edge& edge = result.edges[it->second];
            if (edge.elem[0] < 0) {
                edge.elem[0] = e;
                edge.local[0] = k;
            } else if (edge.elem[1] < 0) {
                edge.elem[1] = e;
                edge.local[1] = k;
            } else {
                throw InvalidInput("edge shared by more than two elements");
            }
            result.element_edges[e][k] = it->second;
        }
    }
    return result;
}

std::vector<char> detect_boundary(int n_vertices, const RawEdges& raw)
{
    std::vector<char> boundary(n_vertices, 0);
    for (const auto& edge : raw.edges) {
        if (edge.on_boundary()) {
            boundary[edge.v0] = 1;
            boundary[edge.v1] = 1;
        }
    }
    return boundary;
}

} // namespace

Triangulation::Triangulation(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements)
    : vertices_(std::move(vertices))
    , elements_(std::move(elements))
{
    validate_elements(n_vertices(), elements_);
    orient_positively(vertices_, elements_);
    refinement_edge_.reserve(elements_.size());
    for (const auto& el : elements_)
        refinement_edge_.push_back(longest_edge(vertices_, el));
    boundary_vertex_ = detect_boundary(n_vertices(), build_edges(n_vertices(), elements_));
    parent_of_.assign(elements_.size(), -1);
    midpoint_parents_.assign(vertices_.size(), {-1, -1});
}

Triangulation::Triangulation(std::vector<Vec2> vertices,
                             std::vector<std::array<int, 3>> elements,
                             std::vector<char> boundary_vertex)
    : vertices_(std::move(vertices))
    , elements_(std::move(elements))
    , boundary_vertex_(std::move(boundary_vertex))
{
    validate_elements(n_vertices(), elements_);
    if (boundary_vertex_.size() != vertices_.size())
        throw InvalidInput("boundary flag count does not match vertex count");
    orient_positively(vertices_, elements_);
    refinement_edge_.reserve(elements_.size());
    for (const auto& el : elements_)
        refinement_edge_.push_back(longest_edge(vertices_, el));
    parent_of_.assign(elements_.size(), -1);
    midpoint_parents_.assign(vertices_.size(), {-1, -1});
}

EdgeTable::EdgeTable(const Triangulation& mesh)
{
    RawEdges raw = build_edges(mesh.n_vertices(), mesh.elements());
    edges = std::move(raw.edges);
    element_edges = std::move(raw.element_edges);
}

ElementGeometry element_geometry(const Triangulation& mesh, int e)
{
    const auto& el = mesh.element(e);
    ElementGeometry g;
    for (int k = 0; k < 3; ++k)
        g.corner[k] = mesh.vertex(el[k]);
    const double doubled_area = cross(g.corner[0], g.corner[1], g.corner[2]);
    g.area = 0.5 * doubled_area;
    g.diameter = 0.0;
    for (int k = 0; k < 3; ++k) {
        g.edge_length[k] = distance(g.corner[(k + 1) % 3], g.corner[(k + 2) % 3]);
        g.diameter = std::max(g.diameter, g.edge_length[k]);
        const Vec2 opposite = g.corner[(k + 2) % 3] - g.corner[(k + 1) % 3];
        g.basis_gradient[k] = {-opposite.y / doubled_area, opposite.x / doubled_area};
    }
    return g;
}

MeshStatistics mesh_statistics(const Triangulation& mesh)
{
    MeshStatistics stats;
    stats.elements = mesh.n_elements();
    stats.min_angle = std::acos(-1.0);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.element(e);
        for (int k = 0; k < 3; ++k) {
            const Vec2 p = mesh.vertex(el[k]);
            const Vec2 a = mesh.vertex(el[(k + 1) % 3]) - p;
            const Vec2 b = mesh.vertex(el[(k + 2) % 3]) - p;
            const double c = dot(a, b) / (norm(a) * norm(b));
            stats.min_angle = std::min(stats.min_angle, std::acos(std::clamp(c, -1.0, 1.0)));
        }
        stats.max_diameter = std::max(stats.max_diameter,
                                      element_geometry(mesh, e).diameter);
    }
    return stats;
}

MeshPtr create_square_mesh(Vec2 lo, Vec2 hi, int divisions)
{
    if (divisions < 1)
        throw InvalidInput("divisions must be positive");
    if (!(hi.x > lo.x) || !(hi.y > lo.y))
        throw InvalidInput("rectangle corners must satisfy lo < hi componentwise");

    const int d = divisions;
    const double dx = (hi.x - lo.x) / d;
    const double dy = (hi.y - lo.y) / d;

    std::vector<Vec2> vertices;
    vertices.reserve(static_cast<size_t>(d + 1) * (d + 1));
    for (int j = 0; j <= d; ++j)
        for (int i = 0; i <= d; ++i)
            vertices.push_back({lo.x + i * dx, lo.y + j * dy});

    const auto at = [d](int i, int j) { return j * (d + 1) + i; };

    std::vector<std::array<int, 3>> elements;
    elements.reserve(2 * static_cast<size_t>(d) * d);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) {
            const int a = at(i, j);
            const int b = at(i + 1, j);
            const int c = at(i + 1, j + 1);
            const int dd = at(i, j + 1);
            elements.push_back({a, b, c});
            elements.push_back({a, c, dd});
        }
    }
    return std::make_shared<Triangulation>(std::move(vertices), std::move(elements));
}

MeshPtr refine(MeshPtr mesh, const std::vector<int>& marked_elements)
{
    if (!mesh)
        throw InvalidInput("refine: null mesh");
    const Triangulation& parent = *mesh;
    for (int e : marked_elements)
        if (e < 0 || e >= parent.n_elements())
            throw InvalidInput("refine: marked element id " + std::to_string(e) + " out of range");

    const RawEdges raw = build_edges(parent.n_vertices(), parent.elements());

    // An element is bisected at its refinement edge.  Splitting an edge of a
    // neighbor forces that neighbor to split as well, so marking is closed
    // under "some edge is marked => the refinement edge is marked", iterated
    // to a fixpoint.
    std::vector<char> edge_marked(raw.edges.size(), 0);
    for (int e : marked_elements)
        edge_marked[raw.element_edges[e][parent.refinement_edge(e)]] = 1;

    for (bool changed = true; changed;) {
        changed = false;
        for (int e = 0; e < parent.n_elements(); ++e) {
            const auto& ee = raw.element_edges[e];
            const int ref = ee[parent.refinement_edge(e)];
            if (edge_marked[ref])
                continue;
            if (edge_marked[ee[0]] || edge_marked[ee[1]] || edge_marked[ee[2]]) {
                edge_marked[ref] = 1;
                changed = true;
            }
        }
    }

    auto child = std::shared_ptr<Triangulation>(new Triangulation());
    child->vertices_ = parent.vertices_;
    child->boundary_vertex_ = parent.boundary_vertex_;
    child->midpoint_parents_.assign(parent.vertices_.size(), {-1, -1});
    child->parent_ = mesh;
    child->generation_ = parent.generation() + 1;

    std::vector<int> midpoint_of_edge(raw.edges.size(), -1);
    const auto midpoint = [&](int edge_id) {
        int& v = midpoint_of_edge[edge_id];
        if (v < 0) {
            const EdgeTable::Edge& edge = raw.edges[edge_id];
            v = static_cast<int>(child->vertices_.size());
            child->vertices_.push_back(0.5 * (parent.vertex(edge.v0) + parent.vertex(edge.v1)));
            child->boundary_vertex_.push_back(edge.on_boundary() ? 1 : 0);
            child->midpoint_parents_.push_back({edge.v0, edge.v1});
        }
        return v;
    };

    const auto emit = [&](std::array<int, 3> el, int refinement_edge, int parent_id) {
        child->elements_.push_back(el);
        child->refinement_edge_.push_back(refinement_edge);
        child->parent_of_.push_back(parent_id);
    };

    // Bisection of (c0, c1, c2) at refinement edge r with midpoint z yields
    // (c_r, c_{r+1}, z) and (c_{r+2}, c_r, z), both with refinement edge 2
    // (the retained parent edge).  This is applied once for the element and
    // once more per half whose own refinement edge (a remaining parent
    // edge) is also marked, so each marked edge is split exactly once and
    // the result is conforming.
    const auto bisect = [&](const std::array<int, 3>& el, int r, int z, int parent_id,
                            int first_edge_id, int second_edge_id) {
        const std::array<int, 3> half1 = {el[r], el[(r + 1) % 3], z};
        const std::array<int, 3> half2 = {el[(r + 2) % 3], el[r], z};
        if (edge_marked[first_edge_id]) {
            const int z2 = midpoint(first_edge_id);
            emit({half1[2], half1[0], z2}, 2, parent_id);
            emit({half1[1], half1[2], z2}, 2, parent_id);
        } else {
            emit(half1, 2, parent_id);
        }
        if (edge_marked[second_edge_id]) {
            const int z2 = midpoint(second_edge_id);
            emit({half2[2], half2[0], z2}, 2, parent_id);
            emit({half2[1], half2[2], z2}, 2, parent_id);
        } else {
            emit(half2, 2, parent_id);
        }
    };

    for (int e = 0; e < parent.n_elements(); ++e) {
        const auto& el = parent.elements_[e];
        const auto& ee = raw.element_edges[e];
        const int r = parent.refinement_edge(e);
        if (!edge_marked[ee[r]]) {
            emit(el, r, e);
            continue;
        }
        const int z = midpoint(ee[r]);
        // The first half keeps parent edge (r+2)%3 as its refinement edge,
        // the second keeps (r+1)%3.
        bisect(el, r, z, e, ee[(r + 2) % 3], ee[(r + 1) % 3]);
    }

    return child;
}

} // namespace lmmg
