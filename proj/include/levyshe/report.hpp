#pragma once

#include <string>
#include <vector>

#include "levyshe/growth.hpp"
#include "levyshe/simulator.hpp"
#include "levyshe/tail_analytics.hpp"

namespace levyshe {

// locale-independent decimal with 12 significant digits
std::string format_number(double x);

std::string fingerprint_hex(const std::string& data);

// write via a temp file in the same directory, then rename
void write_file_atomic(const std::string& path, const std::string& content);

struct ReportMeta {
    std::string fingerprint;
    std::uint64_t seed = 0;
};

// fixed header `r,value,kind,ci_halfwidth`; several curves may share a file
std::string tail_curves_csv(const std::vector<TailCurve>& curves, const ReportMeta& meta);
std::string tail_curves_json(const std::vector<TailCurve>& curves, const ReportMeta& meta);

std::string field_csv(const FieldSample& field, const ReportMeta& meta);

std::string growth_report_json(const GrowthReport& report, const ReportMeta& meta);
std::string peak_counts_csv(const PeakEventReport& report, const ReportMeta& meta);

std::string replicate_values_csv(const std::string& estimand, const std::vector<double>& values,
                                 const ReportMeta& meta);

}  // namespace levyshe
