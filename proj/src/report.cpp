#include "sqsk/report.hpp"

#include <json.hpp>

namespace sqsk {

namespace {

using json = nlohmann::json;

json header(const char* kind)
{
    return json{{"schema_version", kSchemaVersion}, {"kind", kind}};
}

json to_array(const Vector& v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json solution_json(const Solution& s)
{
    return json{{"objective", s.objective},
                {"gap", s.gap},
                {"iterations", s.iterations},
                {"status", to_string(s.status)},
                {"support", s.support},
                {"w", to_array(s.w)}};
}

} // namespace

std::string solve_report(const Solution& sol, const SolveContext& ctx, int indent)
{
    json j = header("solve");
    j["problem"] = {{"n", ctx.n}, {"m", ctx.m}, {"rank", ctx.rank}, {"eps", ctx.eps}, {"lambda", ctx.lam}};
    j["solution"] = solution_json(sol);
    j["seconds"] = ctx.seconds;
    return j.dump(indent);
}

std::string sketch_report(const Sketch& sk, double spectral_estimate, double frobenius, double seconds, int indent)
{
    json j = header("sketch");
    j["n"] = sk.n();
    j["m"] = sk.m();
    j["rank"] = sk.rank();
    j["power_iters"] = sk.meta().power_iters;
    j["seed"] = sk.meta().seed;
    j["spectral_error"] = spectral_estimate;
    j["frobenius_error"] = frobenius;
    j["seconds"] = seconds;
    return j.dump(indent);
}

std::string cv_report(const CVReport& rep, int indent)
{
    json j = header("cv");
    j["model"] = rep.sketched ? "sketched" : "full";
    j["rank"] = rep.rank;
    j["eps"] = rep.eps;
    j["lambdas"] = rep.lambdas;
    j["folds"] = rep.folds;
    json records = json::array();
    for (const CVRecord& r : rep.records) {
        json rec{{"fold", r.fold},
                 {"lambda", r.lam},
                 {"objective", r.objective},
                 {"validation_loss", r.validation_loss},
                 {"cardinality", r.cardinality},
                 {"solve_seconds", r.solve_seconds},
                 {"status", to_string(r.status)}};
        rec["f1"] = r.f1 ? json(*r.f1) : json(nullptr);
        records.push_back(std::move(rec));
    }
    j["records"] = std::move(records);
    j["mean_validation_loss"] = rep.mean_validation_loss();
    j["mean_f1"] = rep.mean_f1();
    j["timings"] = {{"sketch_seconds", rep.sketch_seconds},
                    {"reduce_seconds", rep.reduce_seconds},
                    {"solve_seconds", rep.solve_seconds},
                    {"total_seconds", rep.total_seconds}};
    return j.dump(indent);
}

std::string loo_report(const LOOReport& rep, int indent)
{
    json j = header("loo");
    j["rank"] = rep.rank;
    j["eps"] = rep.eps;
    j["lambda"] = rep.lam;
    json sols = json::array();
    for (const Solution& s : rep.solutions) {
        json e = solution_json(s);
        e.erase("w");
        sols.push_back(std::move(e));
    }
    j["instances"] = std::move(sols);
    j["fallbacks"] = rep.fallbacks;
    j["timings"] = {{"sketch_seconds", rep.sketch_seconds},
                    {"solve_seconds", rep.solve_seconds},
                    {"total_seconds", rep.total_seconds}};
    return j.dump(indent);
}

std::string topic_report(const std::vector<TopicReport>& reps, double lam, double eps, int indent)
{
    json j = header("topic");
    j["lambda"] = lam;
    j["eps"] = eps;
    json queries = json::array();
    for (const TopicReport& r : reps) {
        json ranking = json::array();
        for (const auto& [id, weight] : r.ranking) ranking.push_back({{"feature", id}, {"weight", weight}});
        queries.push_back({{"query", r.query},
                           {"ranking", std::move(ranking)},
                           {"solve_seconds", r.solve_seconds},
                           {"status", to_string(r.status)}});
    }
    j["queries"] = std::move(queries);
    return j.dump(indent);
}

std::string bench_report(const BenchReport& rep, int indent)
{
    json j = header("bench");
    j["repetitions"] = rep.repetitions;
    j["config"] = {{"sizes", rep.config.sizes},
                   {"m_factor", rep.config.m_factor},
                   {"rank", rep.config.rank},
                   {"seed", rep.config.seed},
                   {"lambda_fraction", rep.config.lam_fraction},
                   {"tol", rep.config.tol}};
    json recs = json::array();
    for (const BenchRecord& r : rep.records)
        recs.push_back({{"n", r.n},
                        {"m", r.m},
                        {"k", r.k},
                        {"t_sketch", r.t_sketch},
                        {"t_reduce", r.t_reduce},
                        {"t_solve_sketched", r.t_solve_sketched},
                        {"t_solve_full", r.t_solve_full},
                        {"ratio", r.ratio},
                        {"iterations_sketched", r.iterations_sketched},
                        {"iterations_full", r.iterations_full}});
    j["records"] = std::move(recs);
    const Fingerprint& f = rep.environment;
    j["environment"] = {{"compiler", f.compiler},
                        {"build_type", f.build_type},
                        {"eigen_version", f.eigen_version},
                        {"simd", f.simd},
                        {"hardware_threads", f.hardware_threads}};
    return j.dump(indent);
}

std::string profile_report(const SparsityProfile& prof, int indent)
{
    json j = header("profile");
    j["mode"] = prof.mode == ProfileMode::robust ? "robust" : "nonrobust";
    j["rank"] = prof.rank;
    j["eps"] = prof.eps;
    json pts = json::array();
    for (const ProfilePoint& p : prof.points)
        pts.push_back({{"lambda", p.lam}, {"cardinality", p.cardinality}, {"objective", p.objective}, {"w", to_array(p.w)}});
    j["points"] = std::move(pts);
    return j.dump(indent);
}

} // namespace sqsk
