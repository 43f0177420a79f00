#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oscdiff {

/// One cell of a convergence table: eps,dt,N,error
struct ErrorRow {
    double eps = 0.0;
    double dt = 0.0;
    int n = 0;
    double error = 0.0;
};

/// One detector sample: t,value
struct TraceRow {
    double t = 0.0;
    double value = 0.0;
};

/// One two-scale comparison: eps,order,error
struct AsymptoticRow {
    double eps = 0.0;
    int order = 0;
    double error = 0.0;
};

// Writers emit a header line and 17 significant digits per float.
void write_csv(std::ostream& os, const std::vector<ErrorRow>& rows);
void write_csv(std::ostream& os, const std::vector<TraceRow>& rows);
void write_csv(std::ostream& os, const std::vector<AsymptoticRow>& rows);

// Readers require the exact header; they throw ConfigurationError otherwise.
std::vector<ErrorRow> read_error_csv(std::istream& is);
std::vector<TraceRow> read_trace_csv(std::istream& is);
std::vector<AsymptoticRow> read_asymptotic_csv(std::istream& is);

/// Opens `path` for writing (creating parent directories) and calls write_csv.
template <class Row>
void save_csv(const std::string& path, const std::vector<Row>& rows);

}  // namespace oscdiff
