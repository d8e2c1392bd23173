#include <lmmg/fespace.hpp>

#include <algorithm>
#include <cmath>

#include <lmmg/errors.hpp>

namespace lmmg {

FeSpace::FeSpace(MeshPtr mesh, DofMode mode)
    : mesh_(std::move(mesh))
    , mode_(mode)
{
    if (!mesh_)
        throw InvalidInput("FeSpace: null mesh");
    const int nv = mesh_->n_vertices();
    vertex_to_dof_.assign(nv, -1);
    for (int v = 0; v < nv; ++v) {
        if (mode_ == DofMode::all_free || !mesh_->is_boundary_vertex(v)) {
            vertex_to_dof_[v] = static_cast<int>(dof_to_vertex_.size());
            dof_to_vertex_.push_back(v);
        }
    }
    geometry_.reserve(mesh_->n_elements());
    for (int e = 0; e < mesh_->n_elements(); ++e)
        geometry_.push_back(element_geometry(*mesh_, e));
}

std::array<int, 3> FeSpace::element_dofs(int e) const
{
    const auto& el = mesh_->element(e);
    return {vertex_to_dof_[el[0]], vertex_to_dof_[el[1]], vertex_to_dof_[el[2]]};
}

FeFunction zero_function(SpacePtr space)
{
    Vector coeffs(space->n_dofs(), 0.0);
    return {std::move(space), std::move(coeffs)};
}

Vector vertex_values(const FeFunction& u)
{
    const FeSpace& space = *u.space;
    if (static_cast<int>(u.coeffs.size()) != space.n_dofs())
        throw InvalidInput("coefficient count does not match space dimension");
    Vector values(space.mesh().n_vertices(), 0.0);
    for (int d = 0; d < space.n_dofs(); ++d)
        values[space.vertex_of_dof(d)] = u.coeffs[d];
    return values;
}

SparseMatrix assemble_stiffness(const FeSpace& space)
{
    std::vector<Triplet> triplets;
    triplets.reserve(9 * static_cast<size_t>(space.mesh().n_elements()));
    for (int e = 0; e < space.mesh().n_elements(); ++e) {
        const ElementGeometry& g = space.geometry(e);
        const auto dofs = space.element_dofs(e);
        for (int i = 0; i < 3; ++i) {
            if (dofs[i] < 0)
                continue;
            for (int j = 0; j < 3; ++j)
                if (dofs[j] >= 0)
                    triplets.push_back({dofs[i], dofs[j],
                                        g.area * dot(g.basis_gradient[i], g.basis_gradient[j])});
        }
    }
    return SparseMatrix::from_triplets(space.n_dofs(), std::move(triplets));
}

SparseMatrix assemble_mass(const FeSpace& space,
                           const std::function<double(Vec2)>& weight,
                           int quadrature_degree)
{
    const QuadratureRule& rule = triangle_quadrature(quadrature_degree);
    std::vector<Triplet> triplets;
    triplets.reserve(9 * static_cast<size_t>(space.mesh().n_elements()));
    for (int e = 0; e < space.mesh().n_elements(); ++e) {
        const ElementGeometry& g = space.geometry(e);
        const auto dofs = space.element_dofs(e);
        double local[3][3] = {};
        for (const auto& q : rule.points) {
            const Vec2 x = q.bary[0] * g.corner[0] + q.bary[1] * g.corner[1]
                + q.bary[2] * g.corner[2];
            const double wq = q.weight * g.area * weight(x);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    local[i][j] += wq * q.bary[i] * q.bary[j];
        }
        for (int i = 0; i < 3; ++i) {
            if (dofs[i] < 0)
                continue;
            for (int j = 0; j < 3; ++j)
                if (dofs[j] >= 0)
                    triplets.push_back({dofs[i], dofs[j], local[i][j]});
        }
    }
    return SparseMatrix::from_triplets(space.n_dofs(), std::move(triplets));
}

SparseMatrix assemble_gram(const FeSpace& space, double eps, double nu)
{
    std::vector<Triplet> triplets;
    triplets.reserve(9 * static_cast<size_t>(space.mesh().n_elements()));
    for (int e = 0; e < space.mesh().n_elements(); ++e) {
        const ElementGeometry& g = space.geometry(e);
        const auto dofs = space.element_dofs(e);
        for (int i = 0; i < 3; ++i) {
            if (dofs[i] < 0)
                continue;
            for (int j = 0; j < 3; ++j) {
                if (dofs[j] < 0)
                    continue;
                const double stiff = g.area * dot(g.basis_gradient[i], g.basis_gradient[j]);
                const double mass = g.area / 12.0 * (i == j ? 2.0 : 1.0);
                triplets.push_back({dofs[i], dofs[j], eps * stiff + nu * mass});
            }
        }
    }
    return SparseMatrix::from_triplets(space.n_dofs(), std::move(triplets));
}

FeFunction nodal_interpolant(SpacePtr space, const std::function<double(Vec2)>& g)
{
    Vector coeffs(space->n_dofs());
    for (int d = 0; d < space->n_dofs(); ++d)
        coeffs[d] = g(space->mesh().vertex(space->vertex_of_dof(d)));
    return {std::move(space), std::move(coeffs)};
}

FeFunction prolongate(const FeFunction& u, SpacePtr child_space)
{
    const Triangulation* source = &u.space->mesh();

    // Collect the refinement chain from the child's mesh back to the mesh
    // u lives on.
    std::vector<const Triangulation*> chain;
    for (const Triangulation* m = &child_space->mesh();; m = m->parent_mesh().get()) {
        chain.push_back(m);
        if (m == source)
            break;
        if (!m->parent_mesh())
            throw InvalidInput("prolongate: target mesh does not descend from the source mesh");
    }

    Vector values = vertex_values(u);
    for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
        const Triangulation& finer = **it;
        values.resize(finer.n_vertices());
        for (int v = static_cast<int>((*(it - 1))->n_vertices()); v < finer.n_vertices(); ++v) {
            const auto parents = finer.midpoint_parents(v);
            values[v] = 0.5 * (values[parents[0]] + values[parents[1]]);
        }
    }

    Vector coeffs(child_space->n_dofs());
    for (int d = 0; d < child_space->n_dofs(); ++d)
        coeffs[d] = values[child_space->vertex_of_dof(d)];
    return {std::move(child_space), std::move(coeffs)};
}

namespace {

/// Barycentric coordinates of p in element e; returns the smallest one so
/// callers can test containment with a tolerance.
double barycentric(const ElementGeometry& g, Vec2 p, std::array<double, 3>& bary)
{
    const double doubled_area = 2.0 * g.area;
    bary[0] = cross(g.corner[1], g.corner[2], p) / doubled_area;
    bary[1] = cross(g.corner[2], g.corner[0], p) / doubled_area;
    bary[2] = 1.0 - bary[0] - bary[1];
    return std::min({bary[0], bary[1], bary[2]});
}

double evaluate_in_element(const FeFunction& u, int e, const std::array<double, 3>& bary)
{
    const auto& el = u.space->mesh().element(e);
    double value = 0.0;
    for (int k = 0; k < 3; ++k) {
        const int dof = u.space->dof_of_vertex(el[k]);
        if (dof >= 0)
            value += bary[k] * u.coeffs[dof];
    }
    return value;
}

constexpr double locate_tolerance = 1e-10;

} // namespace

double evaluate(const FeFunction& u, Vec2 p)
{
    const FeSpace& space = *u.space;
    std::array<double, 3> bary;
    for (int e = 0; e < space.mesh().n_elements(); ++e)
        if (barycentric(space.geometry(e), p, bary) >= -locate_tolerance)
            return evaluate_in_element(u, e, bary);
    throw InvalidInput("evaluate: point lies outside the mesh");
}

PointLocator::PointLocator(MeshPtr mesh)
    : mesh_(std::move(mesh))
{
    if (!mesh_)
        throw InvalidInput("PointLocator: null mesh");
    lo_ = hi_ = mesh_->vertex(0);
    for (int v = 1; v < mesh_->n_vertices(); ++v) {
        const Vec2 p = mesh_->vertex(v);
        lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
        hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
    }
    const int target = std::max(1, static_cast<int>(std::sqrt(mesh_->n_elements() / 2.0)));
    nx_ = ny_ = target;
    buckets_.assign(static_cast<size_t>(nx_) * ny_, {});

    const auto clamp_cell = [](int c, int n) { return std::clamp(c, 0, n - 1); };
    const double wx = (hi_.x - lo_.x) / nx_;
    const double wy = (hi_.y - lo_.y) / ny_;
    for (int e = 0; e < mesh_->n_elements(); ++e) {
        const auto& el = mesh_->element(e);
        Vec2 elo = mesh_->vertex(el[0]);
        Vec2 ehi = elo;
        for (int k = 1; k < 3; ++k) {
            const Vec2 p = mesh_->vertex(el[k]);
            elo = {std::min(elo.x, p.x), std::min(elo.y, p.y)};
            ehi = {std::max(ehi.x, p.x), std::max(ehi.y, p.y)};
        }
        const int i0 = clamp_cell(static_cast<int>((elo.x - lo_.x) / wx), nx_);
        const int i1 = clamp_cell(static_cast<int>((ehi.x - lo_.x) / wx), nx_);
        const int j0 = clamp_cell(static_cast<int>((elo.y - lo_.y) / wy), ny_);
        const int j1 = clamp_cell(static_cast<int>((ehi.y - lo_.y) / wy), ny_);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                buckets_[static_cast<size_t>(j) * nx_ + i].push_back(e);
    }
}

int PointLocator::locate(Vec2 p) const
{
    if (p.x < lo_.x - locate_tolerance || p.x > hi_.x + locate_tolerance
        || p.y < lo_.y - locate_tolerance || p.y > hi_.y + locate_tolerance)
        return -1;
    const int i = std::clamp(static_cast<int>((p.x - lo_.x) / (hi_.x - lo_.x) * nx_), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((p.y - lo_.y) / (hi_.y - lo_.y) * ny_), 0, ny_ - 1);
    std::array<double, 3> bary;
    for (int e : buckets_[static_cast<size_t>(j) * nx_ + i])
        if (barycentric(element_geometry(*mesh_, e), p, bary) >= -locate_tolerance)
            return e;
    return -1;
}

double evaluate(const FeFunction& u, const PointLocator& locator, Vec2 p)
{
    if (locator.mesh_ptr().get() != &u.space->mesh())
        throw InvalidInput("evaluate: locator built for a different mesh");
    const int e = locator.locate(p);
    if (e < 0)
        throw InvalidInput("evaluate: point lies outside the mesh");
    std::array<double, 3> bary;
    barycentric(u.space->geometry(e), p, bary);
    return evaluate_in_element(u, e, bary);
}

FeFunction interpolate_onto(const FeFunction& source, SpacePtr target)
{
    if (&source.space->mesh() == &target->mesh()) {
        Vector coeffs(target->n_dofs());
        const Vector values = vertex_values(source);
        for (int d = 0; d < target->n_dofs(); ++d)
            coeffs[d] = values[target->vertex_of_dof(d)];
        return {std::move(target), std::move(coeffs)};
    }

    for (const Triangulation* m = &target->mesh(); m; m = m->parent_mesh().get())
        if (m == &source.space->mesh())
            return prolongate(source, std::move(target));

    const PointLocator locator(source.space->mesh_ptr());
    Vector coeffs(target->n_dofs());
    for (int d = 0; d < target->n_dofs(); ++d)
        coeffs[d] = evaluate(source, locator, target->mesh().vertex(target->vertex_of_dof(d)));
    return {std::move(target), std::move(coeffs)};
}

double integrate(const FeSpace& space, int quadrature_degree,
                 const std::function<double(Vec2)>& integrand)
{
    const QuadratureRule& rule = triangle_quadrature(quadrature_degree);
    double total = 0.0;
    for (int e = 0; e < space.mesh().n_elements(); ++e) {
        const ElementGeometry& g = space.geometry(e);
        double local = 0.0;
        for (const auto& q : rule.points) {
            const Vec2 x = q.bary[0] * g.corner[0] + q.bary[1] * g.corner[1]
                + q.bary[2] * g.corner[2];
            local += q.weight * integrand(x);
        }
        total += g.area * local;
    }
    return total;
}

double integrate(const FeFunction& u, int quadrature_degree,
                 const std::function<double(Vec2, double)>& integrand)
{
    const FeSpace& space = *u.space;
    const QuadratureRule& rule = triangle_quadrature(quadrature_degree);
    const Vector values = vertex_values(u);
    double total = 0.0;
    for (int e = 0; e < space.mesh().n_elements(); ++e) {
        const ElementGeometry& g = space.geometry(e);
        const auto& el = space.mesh().element(e);
        double local = 0.0;
        for (const auto& q : rule.points) {
            const Vec2 x = q.bary[0] * g.corner[0] + q.bary[1] * g.corner[1]
                + q.bary[2] * g.corner[2];
            const double uq = q.bary[0] * values[el[0]] + q.bary[1] * values[el[1]]
                + q.bary[2] * values[el[2]];
            local += q.weight * integrand(x, uq);
        }
        total += g.area * local;
    }
    return total;
}

} // namespace lmmg
