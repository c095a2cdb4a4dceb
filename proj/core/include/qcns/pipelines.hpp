#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qcns/config.hpp"
#include "qcns/estimation.hpp"

namespace qcns {

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double lo = 0.0;  // inclusive acceptance window
    double hi = 0.0;
    bool pass = false;
};

struct FigureReport {
    std::string figure;
    std::vector<CheckResult> checks;
    std::vector<std::string> outputs;  // files written, relative to out_dir

    bool all_pass() const;
};

void print_report(std::ostream& os, const FigureReport& report);
void write_verdicts_json(const FigureReport& report, const std::filesystem::path& path);

// Desk-scale reproductions of the published analyses. `scale` shortens the
// simulated durations (1.0 = the durations used by the acceptance gate);
// rates and budgets are preserved.
FigureReport reproduce_fig3b(const std::filesystem::path& out_dir, uint64_t seed, double scale = 1.0);
FigureReport reproduce_fig3c(const std::filesystem::path& out_dir, uint64_t seed, double scale = 1.0);
FigureReport reproduce_fig4(const std::filesystem::path& out_dir, uint64_t seed, double scale = 1.0);
FigureReport reproduce_figs1(const std::filesystem::path& out_dir, uint64_t seed, double scale = 1.0);
FigureReport reproduce_figs4(const std::filesystem::path& out_dir, uint64_t seed, double scale = 1.0);

// Dispatch by figure name (fig3b, fig3c, fig4, figS1, figS4).
FigureReport reproduce(const std::string& figure, const std::filesystem::path& out_dir,
                       uint64_t seed, double scale = 1.0);
std::vector<std::string> reproduce_figure_names();

// simulate: compose the environment, run the configured protocol, write the
// CSVs and the manifest. Shot streams larger than the in-memory budget are
// generated and written in recal-aligned chunks.
std::vector<std::string> cmd_simulate(const RunConfig& cfg);

// analyze: small driver turning stored CSVs into spectra / histograms / fits
// according to a JSON analysis spec (see README).
std::vector<std::string> cmd_analyze(const std::string& spec_json,
                                     const std::filesystem::path& out_dir);

}  // namespace qcns
