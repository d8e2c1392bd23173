#include <lmmg/io.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <lmmg/errors.hpp>

namespace lmmg {

std::string format_full(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void write_file_atomically(const std::string& path, const std::string& content) {
    const std::string temp = path + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open '" + temp + "' for writing");
        out << content;
        if (!out.flush())
            throw IoError("write to '" + temp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec)
        throw IoError("cannot rename '" + temp + "' to '" + path + "': " + ec.message());
}

void write_mesh(std::ostream& out, const Triangulation& mesh) {
    out << "vertices " << mesh.n_vertices() << " elements " << mesh.n_elements() << "\n";
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        const Vec2 p = mesh.vertex(v);
        out << format_full(p.x) << ' ' << format_full(p.y) << ' '
            << (mesh.is_boundary_vertex(v) ? 1 : 0) << "\n";
    }
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.element(e);
        out << el[0] << ' ' << el[1] << ' ' << el[2] << "\n";
    }
}

MeshPtr read_mesh(std::istream& in) {
    std::string word_vertices;
    std::string word_elements;
    long n_vertices = 0;
    long n_elements = 0;
    if (!(in >> word_vertices >> n_vertices >> word_elements >> n_elements) ||
        word_vertices != "vertices" || word_elements != "elements")
        throw IoError("mesh header must read 'vertices <n> elements <m>'");
    if (n_vertices < 3 || n_elements < 1)
        throw IoError("mesh must contain at least one triangle");

    std::vector<Vec2> vertices(static_cast<size_t>(n_vertices));
    std::vector<char> boundary(static_cast<size_t>(n_vertices), 0);
    for (long v = 0; v < n_vertices; ++v) {
        int flag = 0;
        if (!(in >> vertices[v].x >> vertices[v].y >> flag) || (flag != 0 && flag != 1))
            throw IoError("malformed vertex line " + std::to_string(v));
        boundary[v] = static_cast<char>(flag);
    }
    std::vector<std::array<int, 3>> elements(static_cast<size_t>(n_elements));
    for (long e = 0; e < n_elements; ++e) {
        auto& el = elements[e];
        if (!(in >> el[0] >> el[1] >> el[2]))
            throw IoError("malformed element line " + std::to_string(e));
        for (int k = 0; k < 3; ++k)
            if (el[k] < 0 || el[k] >= n_vertices)
                throw IoError("element " + std::to_string(e) + " references vertex " +
                              std::to_string(el[k]) + " out of range");
    }
    return std::make_shared<Triangulation>(std::move(vertices), std::move(elements),
                                           std::move(boundary));
}

void write_mesh_file(const std::string& path, const Triangulation& mesh) {
    std::ostringstream out;
    write_mesh(out, mesh);
    write_file_atomically(path, out.str());
}

MeshPtr read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open mesh file '" + path + "'");
    return read_mesh(in);
}

void write_solution(std::ostream& out, const FeFunction& u) {
    for (double c : u.coeffs)
        out << format_full(c) << "\n";
}

Vector read_solution(std::istream& in) {
    Vector coeffs;
    double value = 0.0;
    while (in >> value)
        coeffs.push_back(value);
    if (coeffs.empty())
        throw IoError("solution file holds no coefficients");
    return coeffs;
}

void write_solution_file(const std::string& path, const FeFunction& u) {
    std::ostringstream out;
    write_solution(out, u);
    write_file_atomically(path, out.str());
}

Vector read_solution_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open solution file '" + path + "'");
    return read_solution(in);
}

void export_native(const std::string& stem, const FeFunction& u) {
    write_mesh_file(stem + ".mesh", u.space->mesh());
    write_solution_file(stem + ".sol", u);
}

FeFunction load_solution(const std::string& stem) {
    MeshPtr mesh = read_mesh_file(stem + ".mesh");
    auto space = std::make_shared<FeSpace>(mesh, DofMode::zero_boundary);
    Vector coeffs = read_solution_file(stem + ".sol");
    if (static_cast<long>(coeffs.size()) != space->n_dofs())
        throw IoError("'" + stem + ".sol' holds " + std::to_string(coeffs.size()) +
                      " coefficients but the mesh has " + std::to_string(space->n_dofs()) +
                      " interior vertices");
    return FeFunction{space, std::move(coeffs)};
}

void export_vtk(const std::string& path, const FeFunction& u) {
    const Triangulation& mesh = u.space->mesh();
    const Vector values = vertex_values(u);
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n";
    out << "finite element iterate\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.n_vertices() << " double\n";
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        const Vec2 p = mesh.vertex(v);
        out << format_full(p.x) << ' ' << format_full(p.y) << " 0\n";
    }
    out << "CELLS " << mesh.n_elements() << ' ' << 4L * mesh.n_elements() << "\n";
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.element(e);
        out << "3 " << el[0] << ' ' << el[1] << ' ' << el[2] << "\n";
    }
    out << "CELL_TYPES " << mesh.n_elements() << "\n";
    for (int e = 0; e < mesh.n_elements(); ++e)
        out << "5\n";
    out << "POINT_DATA " << mesh.n_vertices() << "\n";
    out << "SCALARS solution double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double value : values)
        out << format_full(value) << "\n";
    write_file_atomically(path, out.str());
}

} // namespace lmmg
