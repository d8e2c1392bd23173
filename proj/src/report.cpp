#include <lmmg/report.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include <lmmg/io.hpp>

namespace lmmg {

namespace {
constexpr const char* csv_header = "N,elements,dofs,eta,res_norm,energy,minimax_steps,sigma";
}

std::string run_csv_text(const RunLog& log) {
    std::ostringstream out;
    out << csv_header << "\n";
    for (const GenerationRecord& r : log.records) {
        out << r.generation << ',' << r.elements << ',' << r.dofs << ','
            << format_full(r.eta) << ',' << format_full(r.res_norm) << ','
            << format_full(r.energy) << ',' << r.minimax_steps << ','
            << format_full(r.sigma) << "\n";
    }
    return out.str();
}

void write_run_csv(const std::string& path, const RunLog& log) {
    write_file_atomically(path, run_csv_text(log));
}

std::vector<GenerationRecord> read_run_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open CSV file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != csv_header)
        throw IoError("'" + path + "' does not start with the expected CSV header");

    std::vector<GenerationRecord> records;
    long line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty())
            continue;
        std::istringstream row(line);
        GenerationRecord r;
        char c[7];
        if (!(row >> r.generation >> c[0] >> r.elements >> c[1] >> r.dofs >> c[2] >> r.eta >>
              c[3] >> r.res_norm >> c[4] >> r.energy >> c[5] >> r.minimax_steps >> c[6] >>
              r.sigma) ||
            std::string(c, 7) != std::string(7, ','))
            throw IoError("malformed CSV row at line " + std::to_string(line_number) + " of '" +
                          path + "'");
        records.push_back(r);
    }
    return records;
}

double indicator_slope(const std::vector<GenerationRecord>& records, int window) {
    if (window < 2)
        throw InvalidInput("slope window must be at least 2");
    const size_t n = std::min<size_t>(records.size(), static_cast<size_t>(window));
    if (n < 2)
        throw InvalidInput("slope needs at least two records");
    const size_t begin = records.size() - n;

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = begin; i < records.size(); ++i) {
        if (!(records[i].elements > 0 && records[i].eta > 0))
            throw InvalidInput("slope needs positive element counts and indicators");
        const double x = std::log(static_cast<double>(records[i].elements));
        const double y = std::log(records[i].eta);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (!(denom > 0.0))
        throw InvalidInput("slope needs at least two distinct element counts");
    return (n * sxy - sx * sy) / denom;
}

double eta_at_elements(const std::vector<GenerationRecord>& records, double target_elements) {
    if (records.size() < 2)
        throw InvalidInput("log-log interpolation needs at least two records");
    if (!(target_elements > 0.0))
        throw InvalidInput("target element count must be positive");
    for (const GenerationRecord& r : records)
        if (!(r.elements > 0 && r.eta > 0))
            throw InvalidInput("log-log interpolation needs positive data");

    const double xt = std::log(target_elements);
    // Records are ordered by generation and element counts never decrease;
    // pick the bracketing pair, or the boundary pair for extrapolation.
    size_t hi = 1;
    while (hi + 1 < records.size() &&
           std::log(static_cast<double>(records[hi].elements)) < xt)
        ++hi;
    size_t lo = hi - 1;
    while (lo > 0 && records[lo].elements == records[hi].elements)
        --lo;
    const double x0 = std::log(static_cast<double>(records[lo].elements));
    const double x1 = std::log(static_cast<double>(records[hi].elements));
    const double y0 = std::log(records[lo].eta);
    const double y1 = std::log(records[hi].eta);
    if (!(x1 > x0))
        throw InvalidInput("log-log interpolation needs two distinct element counts");
    const double y = y0 + (y1 - y0) * (xt - x0) / (x1 - x0);
    return std::exp(y);
}

} // namespace lmmg
