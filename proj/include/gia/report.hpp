#pragma once

#include "gia/harness.hpp"
#include "gia/homophily.hpp"

namespace gia {

struct NamedProfile {
    std::string label;
    HomophilyProfile profile;
};

nlohmann::json profile_to_json(const NamedProfile& p);
/// Rebuilds the histogram from the stored samples; a stored histogram that
/// disagrees is an error.
NamedProfile profile_from_json(const nlohmann::json& j);

/// Overlaid 40-bin step histograms on [-1, 1]. Each profile's counts are also
/// written as a comment: <!-- bins label: c0 c1 ... c39 -->.
std::string histogram_svg(const std::vector<NamedProfile>& profiles);

/// Parses the bin-count comments back out of histogram_svg output.
std::vector<std::pair<std::string, std::vector<Index>>> svg_bin_counts(const std::string& svg);

/// Markdown table: one row per attack, one mean/max column pair per category,
/// then the attack's mean homophily shift when known.
std::string summary_table(const EvalReport& report);

}  // namespace gia
