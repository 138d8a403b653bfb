#pragma once

#include <string>

#include "mvhvi/hypotheses.hpp"
#include "mvhvi/solver.hpp"
#include "mvhvi/types.hpp"

// CSV emission: UTF-8, LF line endings, header row, doubles printed with
// %.17g so identical runs produce byte-identical files.

namespace mvhvi {

std::string format_double(double x);
std::string vec_to_csv(const Vec& v);
Vec vec_from_csv(const std::string& text);

void write_trace_csv(const SolveTrace& trace, const std::string& path);
void write_report_csv(const ResidualReport& rep, const Vec& u,
                      const Vec& lambda, const std::string& path);
void write_audit_csv(const AuditReport& rep, const std::string& path);

} // namespace mvhvi
