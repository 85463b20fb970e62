#include "tma/report_writer.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tma {

std::string format_sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

std::string format_complex(cplx v) {
  if (v.imag() == 0.0) {
    const std::string re = format_sig6(v.real());
    return v.real() > 0.0 ? "+" + re : re;
  }
  const std::string im = format_sig6(v.imag());
  return format_sig6(v.real()) + (v.imag() >= 0.0 ? "+" : "") + im + "j";
}

std::string format_tau_list(const std::vector<Fraction>& tau) {
  std::string out;
  for (std::size_t i = 0; i < tau.size(); ++i) out += (i ? " " : "") + format_fraction(tau[i]);
  return out;
}

std::string format_symbols(const SymbolVector& s) {
  std::string out;
  for (std::size_t i = 0; i < s.symbols.size(); ++i) out += (i ? " " : "") + format_complex(s.symbols[i]);
  return out;
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream o;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) o << ',';
      o << cells[i];
    }
    o << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  return o.str();
}

std::string to_plot_data(const std::vector<PlotBlock>& blocks) {
  std::ostringstream o;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b) o << "\n\n";
    o << "# " << blocks[b].name << '\n';
    for (const auto& [x, y] : blocks[b].points) o << format_sig6(x) << ' ' << format_sig6(y) << '\n';
  }
  return o.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable t{{"theta_deg", "ber_undefied", "ber_defied"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({format_sig6(r.theta_deg), format_sig6(r.undefied.ber),
                      r.defied ? format_sig6(r.defied->ber) : std::string()});
  }
  return t;
}

std::vector<PlotBlock> sweep_plot(const std::vector<SweepRow>& rows) {
  PlotBlock undefied{"ber_undefied", {}};
  PlotBlock defied{"ber_defied", {}};
  for (const auto& r : rows) {
    undefied.points.emplace_back(r.theta_deg, r.undefied.ber);
    if (r.defied) defied.points.emplace_back(r.theta_deg, r.defied->ber);
  }
  return {undefied, defied};
}

CsvTable ber_table(const std::vector<BerReport>& reports) {
  CsvTable t{{"scenario", "theta_deg", "n_bits", "n_errors", "ber", "seed", "candidates", "defense_failed"}, {}};
  for (const auto& r : reports) {
    t.rows.push_back({to_string(r.scenario), format_sig6(r.direction_deg), std::to_string(r.n_bits),
                      std::to_string(r.n_errors), format_sig6(r.ber), std::to_string(r.seed),
                      std::to_string(r.per_candidate.size()), r.defense_failed ? "1" : "0"});
  }
  return t;
}

CsvTable matrix_table(const MixingMatrix& m) {
  CsvTable t{{"row", "col", "re", "im"}, {}};
  for (int i = 0; i < m.n_subcarriers(); ++i) {
    for (int k = 0; k < m.n_subcarriers(); ++k) {
      t.rows.push_back({std::to_string(i + 1), std::to_string(k + 1), format_sig6(m(i, k).real()),
                        format_sig6(m(i, k).imag())});
    }
  }
  return t;
}

CsvTable received_table(const ReceivedVector& y) {
  CsvTable t{{"subcarrier", "re", "im"}, {}};
  for (std::size_t i = 0; i < y.samples.size(); ++i) {
    t.rows.push_back({std::to_string(i + 1), format_sig6(y.samples[i].real()), format_sig6(y.samples[i].imag())});
  }
  return t;
}

CsvTable candidate_table(const std::vector<CandidateSolution>& candidates, const std::vector<double>& bers,
                         const std::vector<std::string>& roles) {
  CsvTable t{{"role", "n", "delta_tau", "tau_on", "symbols", "residual", "ber"}, {}};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    t.rows.push_back({i < roles.size() ? roles[i] : "candidate", std::to_string(c.n_hat),
                      format_fraction(c.pattern_hat.delta_tau), format_tau_list(c.pattern_hat.tau_on),
                      format_symbols(c.s_hat), format_sig6(c.residual), i < bers.size() ? format_sig6(bers[i]) : ""});
  }
  return t;
}

CsvTable rotation_table(const std::vector<RotationPlan>& plans) {
  CsvTable t{{"multiplier", "branch", "theta_r_deg", "condition_error"}, {}};
  for (const auto& p : plans) {
    t.rows.push_back({std::to_string(p.multiplier), p.branch == RotationBranch::principal ? "principal" : "supplement",
                      format_sig6(rad_to_deg(p.theta_r)), format_sig6(p.condition_error)});
  }
  return t;
}

}  // namespace tma
