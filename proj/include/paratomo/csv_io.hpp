#pragma once

#include <iosfwd>
#include <string>

#include "paratomo/transport.hpp"

namespace paratomo {

/// Text artifacts: plain CSV with '#' header lines carrying the layout and
/// provenance, numbers printed with 17 significant digits so a round trip
/// reproduces the doubles bitwise.  Readers check the magic line and the
/// declared shape and throw SchemaError on any mismatch.

/// Fan data rows: beta, alpha, mu_weight, then re/im per entry.
void write_fan_csv(std::ostream& os, const FanData& d, const MetricField& m, double step);
FanData read_fan_csv(std::istream& is, const MetricField& m);

/// Pair field rows: r_index, theta_index, then re/im per component of
/// a1, a2 and the potential part.
void write_pair_csv(std::ostream& os, const PairField& h);
PairField read_pair_csv(std::istream& is);

/// Plain nodal field rows: r_index, theta_index, re/im per component.
void write_field_csv(std::ostream& os, const Field& f);
Field read_field_csv(std::istream& is);

void save_fan_csv(const std::string& path, const FanData& d, const MetricField& m, double step);
FanData load_fan_csv(const std::string& path, const MetricField& m);
void save_pair_csv(const std::string& path, const PairField& h);
PairField load_pair_csv(const std::string& path);
void save_field_csv(const std::string& path, const Field& f);
Field load_field_csv(const std::string& path);

}  // namespace paratomo
