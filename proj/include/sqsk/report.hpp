#pragma once

#include "sqsk/bench.hpp"
#include "sqsk/multi_instance.hpp"
#include "sqsk/nonrobust.hpp"
#include "sqsk/sketch.hpp"
#include "sqsk/solver.hpp"

#include <string>
#include <vector>

namespace sqsk {

// Every report is one JSON object with "schema_version" and "kind" at the top
// level; the matching JSON Schemas live in schemas/.
inline constexpr int kSchemaVersion = 1;

struct SolveContext
{
    Index n = 0;
    Index m = 0;
    Index rank = 0; // 0 when solved on the full data
    double eps = 0.0;
    double lam = 0.0;
    double seconds = 0.0;
};

std::string solve_report(const Solution& sol, const SolveContext& ctx, int indent = 2);
std::string sketch_report(const Sketch& sk, double spectral_estimate, double frobenius, double seconds,
                          int indent = 2);
std::string cv_report(const CVReport& rep, int indent = 2);
std::string loo_report(const LOOReport& rep, int indent = 2);
std::string topic_report(const std::vector<TopicReport>& reps, double lam, double eps, int indent = 2);
std::string bench_report(const BenchReport& rep, int indent = 2);
std::string profile_report(const SparsityProfile& prof, int indent = 2);

} // namespace sqsk
