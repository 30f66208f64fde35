#ifndef RJTUNE_IO_HPP
#define RJTUNE_IO_HPP

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>

#include "rjtune/diagnostics.hpp"
#include "rjtune/diffusion.hpp"
#include "rjtune/kernel.hpp"
#include "rjtune/tuning.hpp"

namespace rjtune {

inline constexpr const char* kVersion = "0.1.0";

/// Floating-point text at 17 significant digits (round-trips doubles).
std::string format_double(double value);

/// Writes through a temporary file in the same directory and renames into
/// place, so a failed run leaves no partial file behind.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);

void write_trace_csv(const std::filesystem::path& path, const ChainTrace& trace);

std::string tune_report_json(const TuneReport& report, std::uint64_t seed);
std::string tune_report_table(const TuneReport& report);

void write_inefficiency_curves_csv(const std::filesystem::path& path,
                                   const InefficiencyCurves& curves);
void write_tau_star_csv(const std::filesystem::path& path,
                        const InefficiencyCurves& curves);

void write_experiment_csv(const std::filesystem::path& path, const ExperimentResult& result);
std::string experiment_metadata_json(const ExperimentResult& result);

struct LimitCheckRow {
  std::string check;  // "birth_rate" or "z1_ks_jittered"
  int n;
  double estimate;
  double target;
  double distance;
};
void write_limitcheck_csv(const std::filesystem::path& path,
                          std::span<const LimitCheckRow> rows);

}  // namespace rjtune

#endif  // RJTUNE_IO_HPP
