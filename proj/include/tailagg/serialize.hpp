#pragma once

#include <iosfwd>

#include <json.hpp>

#include "tailagg/bootstrap.hpp"
#include "tailagg/dependence.hpp"
#include "tailagg/fitting.hpp"
#include "tailagg/montecarlo.hpp"
#include "tailagg/pipeline.hpp"
#include "tailagg/tailpredict.hpp"

namespace tailagg {

/// Insertion-ordered so that output is byte-stable across runs.
using Json = nlohmann::ordered_json;

// Non-finite numbers (an infinite r_F, failed statistics) serialize as null.
Json to_json(const GpdParams& p);
Json to_json(const MarginPair& m);
Json to_json(const TailForm& f);
Json to_json(const LtDescriptor& d);
Json to_json(const DependenceSummary& s);
Json to_json(const DependenceEstimate& e);
Json to_json(const GpdFit& f);
Json to_json(const PooledFit& f);
Json to_json(const BootstrapCI& ci);
Json to_json(const QuantileCurve& c);
Json to_json(const Verdict& v);
Json to_json(const FitReport& r);
Json to_json(const StudyOptions& o);

/// Columns p, r_p, transformed_r_p.
void write_curve_csv(std::ostream& out, const QuantileCurve& curve);

}  // namespace tailagg
