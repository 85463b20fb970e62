#pragma once

// CSV and plot-data emission. CSV files are UTF-8 with a header row and '.'
// as decimal separator; every floating-point value is written with six
// significant digits. Plot-data files hold two-column x/y blocks separated by
// blank lines, each block preceded by a '# name' line.

#include <string>
#include <vector>

#include "tma/ber_harness.hpp"
#include "tma/defense.hpp"
#include "tma/tma_core.hpp"

namespace tma {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct PlotBlock {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// "%.6g"
std::string format_sig6(double v);
/// Real points as "+1"/"-0.707107"; complex ones as "re+imj".
std::string format_complex(cplx v);
/// Space-separated fractions.
std::string format_tau_list(const std::vector<Fraction>& tau);
std::string format_symbols(const SymbolVector& s);

std::string to_csv(const CsvTable& table);
std::string to_plot_data(const std::vector<PlotBlock>& blocks);

/// Throws std::runtime_error naming the path when the file cannot be written.
void write_text_file(const std::string& path, const std::string& contents);

CsvTable sweep_table(const std::vector<SweepRow>& rows);
std::vector<PlotBlock> sweep_plot(const std::vector<SweepRow>& rows);
CsvTable ber_table(const std::vector<BerReport>& reports);
CsvTable matrix_table(const MixingMatrix& t);
CsvTable received_table(const ReceivedVector& y);
/// role, n, delta_tau, tau_on, symbols, residual, ber. `bers` may be empty or
/// hold one value per candidate.
CsvTable candidate_table(const std::vector<CandidateSolution>& candidates, const std::vector<double>& bers = {},
                         const std::vector<std::string>& roles = {});
CsvTable rotation_table(const std::vector<RotationPlan>& plans);

}  // namespace tma
