#include "mvhvi/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mvhvi {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string vec_to_csv(const Vec& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

Vec vec_from_csv(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      vals.push_back(std::stod(item));
    } catch (...) {
      throw ParseError("bad number in csv vector: " + item);
    }
  }
  Vec v(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<int>(i)] = vals[i];
  return v;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary); // keep LF on every platform
  if (!out) throw ParseError("cannot open output file: " + path);
  return out;
}

} // namespace

void write_trace_csv(const SolveTrace& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "iter,r,s,u_update_norm,compl_residual\n";
  for (const auto& row : trace.rows) {
    out << row.iter << "," << format_double(row.r) << ","
        << format_double(row.s) << "," << format_double(row.u_update_norm)
        << "," << format_double(row.compl_residual) << "\n";
  }
}

void write_report_csv(const ResidualReport& rep, const Vec& u,
                      const Vec& lambda, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "formulation,violation\n";
  out << "original," << format_double(rep.r_original) << "\n";
  out << "minty," << format_double(rep.r_minty) << "\n";
  out << "combined," << format_double(rep.r_combined) << "\n";
  out << "minty-combined," << format_double(rep.r_minty_combined) << "\n";
  out << "u,\"" << vec_to_csv(u) << "\"\n";
  out << "lambda,\"" << vec_to_csv(lambda) << "\"\n";
  out << "probes," << rep.sampling.count << "\n";
  out << "seed," << rep.sampling.seed << "\n";
  out << "refine," << (rep.sampling.refine ? 1 : 0) << "\n";
}

void write_audit_csv(const AuditReport& rep, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "hypothesis,status,margin,witness_seed\n";
  for (const auto& e : rep.entries) {
    out << e.name << "," << to_string(e.status) << ","
        << format_double(e.margin) << "," << e.seed << "\n";
  }
}

} // namespace mvhvi
