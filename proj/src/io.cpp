#include "rjtune/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rjtune {

namespace {
const char* kMoveNames[3] = {"update", "birth", "death"};
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
      writer(out);
      out.flush();
      if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

void write_trace_csv(const std::filesystem::path& path, const ChainTrace& trace) {
  atomic_write(path, [&](std::ostream& out) {
    out << "iter,k,x1,move_kind,accepted\r\n";
    for (std::size_t i = 0; i < trace.k.size(); ++i) {
      out << (trace.burn_in + static_cast<std::int64_t>(i)) << ',' << trace.k[i] << ','
          << format_double(trace.x1[i]) << ',' << kMoveNames[trace.move_kind[i]] << ','
          << static_cast<int>(trace.accepted[i]) << "\r\n";
    }
  });
}

std::string tune_report_json(const TuneReport& report, std::uint64_t seed) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["seed"] = seed;
  j["recommended_ell"] = report.recommended_ell;
  j["update_accept_rate"] = report.update_accept_rate;
  j["switch_rate"] = report.switch_rate;
  j["birth_accept_rate"] = report.birth_accept_rate;
  j["death_accept_rate"] = report.death_accept_rate;
  if (report.tau_closed_form) j["tau_closed_form"] = *report.tau_closed_form;
  if (report.tau_rate_based) j["tau_rate_based"] = *report.tau_rate_based;
  if (report.a_estimate) j["a_estimate"] = *report.a_estimate;
  j["a_was_estimated"] = report.a_was_estimated;
  j["iterations_used"] = report.iterations_used;
  j["budget_exhausted"] = report.budget_exhausted;
  j["flags"] = report.flags;
  return j.dump(2) + "\n";
}

std::string tune_report_table(const TuneReport& report) {
  std::ostringstream out;
  out << "tune report\n";
  out << "  recommended ell        " << format_double(report.recommended_ell) << "\n";
  out << "  update accept rate     " << format_double(report.update_accept_rate) << "\n";
  out << "  switch rate            " << format_double(report.switch_rate) << "\n";
  out << "  birth accept rate      " << format_double(report.birth_accept_rate) << "\n";
  out << "  death accept rate      " << format_double(report.death_accept_rate) << "\n";
  if (report.tau_closed_form)
    out << "  tau (closed form)      " << format_double(*report.tau_closed_form) << "\n";
  if (report.tau_rate_based)
    out << "  tau (rate based)       " << format_double(*report.tau_rate_based) << "\n";
  if (report.a_estimate)
    out << "  A estimate             " << format_double(*report.a_estimate)
        << (report.a_was_estimated ? "  (from birth acceptance)" : "") << "\n";
  out << "  iterations used        " << report.iterations_used << "\n";
  for (const std::string& f : report.flags) out << "  flag: " << f << "\n";
  return out.str();
}

void write_inefficiency_curves_csv(const std::filesystem::path& path,
                                   const InefficiencyCurves& curves) {
  atomic_write(path, [&](std::ostream& out) {
    out << "A,tau,inefficiency\r\n";
    for (const InefficiencyRow& row : curves.curves)
      out << format_double(row.a) << ',' << format_double(row.tau) << ','
          << format_double(row.value) << "\r\n";
  });
}

void write_tau_star_csv(const std::filesystem::path& path,
                        const InefficiencyCurves& curves) {
  atomic_write(path, [&](std::ostream& out) {
    out << "A,tau_star\r\n";
    for (const auto& [a, tau_star] : curves.tau_star)
      out << format_double(a) << ',' << format_double(tau_star) << "\r\n";
  });
}

void write_experiment_csv(const std::filesystem::path& path,
                          const ExperimentResult& result) {
  atomic_write(path, [&](std::ostream& out) {
    out << "A,tau,MAD_k,MAD_mu,MAD_sigma,global_measure\r\n";
    for (const ExperimentCell& cell : result.cells)
      out << format_double(cell.a) << ',' << format_double(cell.tau) << ','
          << format_double(cell.mads.mad_k) << ',' << format_double(cell.mads.mad_mu)
          << ',' << format_double(cell.mads.mad_sigma) << ','
          << format_double(cell.measure.value) << "\r\n";
  });
}

std::string experiment_metadata_json(const ExperimentResult& result) {
  const ExperimentConfig& c = result.config;
  nlohmann::json j;
  j["version"] = kVersion;
  j["master_seed"] = c.master_seed;
  j["n"] = c.n;
  j["mu"] = c.mu;
  j["sigma"] = c.sigma;
  j["a_list"] = c.a_list;
  j["tau_grid"] = c.tau_grid;
  j["replicates"] = c.replicates;
  j["iterations"] = c.iterations;
  j["burn_in"] = c.burn_in;
  nlohmann::json degenerate = nlohmann::json::array();
  for (const ExperimentCell& cell : result.cells)
    if (cell.measure.k_degenerate || cell.measure.mu_degenerate ||
        cell.measure.sigma_degenerate) {
      nlohmann::json d;
      d["A"] = cell.a;
      d["tau"] = cell.tau;
      d["k"] = cell.measure.k_degenerate;
      d["mu"] = cell.measure.mu_degenerate;
      d["sigma"] = cell.measure.sigma_degenerate;
      degenerate.push_back(d);
    }
  j["degenerate_blocks"] = degenerate;
  return j.dump(2) + "\n";
}

void write_limitcheck_csv(const std::filesystem::path& path,
                          std::span<const LimitCheckRow> rows) {
  atomic_write(path, [&](std::ostream& out) {
    out << "check,n,estimate,target,distance\r\n";
    for (const LimitCheckRow& row : rows)
      out << row.check << ',' << row.n << ',' << format_double(row.estimate) << ','
          << format_double(row.target) << ',' << format_double(row.distance) << "\r\n";
  });
}

}  // namespace rjtune
