#pragma once

#include <iosfwd>
#include <string>

#include <lmmg/fespace.hpp>

namespace lmmg {

/// Plain text mesh format:
///   vertices <n> elements <m>
///   x y boundary_flag        (n lines, flag 0 or 1)
///   i j k                    (m lines, 0-based vertex ids)
/// Numbers are written with 17 significant digits, so coordinates
/// round-trip exactly.
void write_mesh(std::ostream& out, const Triangulation& mesh);
MeshPtr read_mesh(std::istream& in);

void write_mesh_file(const std::string& path, const Triangulation& mesh);
MeshPtr read_mesh_file(const std::string& path);

/// Solution format: one coefficient per line, one line per degree of
/// freedom of the space built on the paired mesh.
void write_solution(std::ostream& out, const FeFunction& u);
Vector read_solution(std::istream& in);

void write_solution_file(const std::string& path, const FeFunction& u);
Vector read_solution_file(const std::string& path);

/// Writes <stem>.mesh and <stem>.sol; the pair is what load_solution reads
/// back.  All file writes in this project go through a temporary file that
/// is renamed into place, so readers never observe partial output.
void export_native(const std::string& stem, const FeFunction& u);
FeFunction load_solution(const std::string& stem);

/// Legacy VTK export of the mesh with the iterate as a point scalar field.
void export_vtk(const std::string& path, const FeFunction& u);

/// Writes content to path atomically (temporary file plus rename).
void write_file_atomically(const std::string& path, const std::string& content);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_full(double value);

} // namespace lmmg
