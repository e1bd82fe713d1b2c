#pragma once
//
// Running tasks (optionally on several threads) and writing the CSV report
// and the summary table.
//

#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>

#include "cplxinterp/harness/suites.hpp"

namespace cplxinterp::harness {

struct RunOptions
{
    std::vector<std::string> suites;
    std::uint64_t seed = 0;
    int jobs = 1;
    /// Called after each finished task with (done, total, key); may be empty.
    std::function<void(size_t, size_t, const std::string&)> progress;
};

inline std::vector<std::string> expand_suite(const std::string& s)
{
    if (s == "all") return suite_names();
    for (const auto& n : suite_names())
        if (n == s) return {s};
    throw DomainError("unknown suite '" + s + "'");
}

/// Runs one task; solver errors become records instead of aborting the run.
inline std::vector<CheckRecord> run_task(const Task& t, std::uint64_t run_seed)
{
    const std::uint64_t seed = mix_seed(run_seed, fnv1a(t.suite + "/" + t.key));
    CheckRecord err;
    err.suite = t.suite;
    err.instance = t.key;
    try {
        return t.run(seed);
    } catch (const DomainError& e) {
        err.status = Status::Skipped;
        err.note = e.what();
    } catch (const std::exception& e) {
        err.status = Status::Stagnated;
        err.note = std::string("error: ") + e.what();
    }
    return {err};
}

inline std::vector<CheckRecord> run_suites(const Config& cfg, const RunOptions& opt)
{
    std::vector<Task> tasks;
    for (const auto& s : opt.suites) {
        auto t = suite_tasks(s, cfg);
        tasks.insert(tasks.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
    }
    std::vector<std::vector<CheckRecord>> results(tasks.size());
    std::atomic<size_t> next{0}, done{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (size_t i; (i = next.fetch_add(1)) < tasks.size();) {
            results[i] = run_task(tasks[i], opt.seed);
            const size_t d = ++done;
            if (opt.progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                opt.progress(d, tasks.size(), tasks[i].suite + "/" + tasks[i].key);
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(tasks.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    std::vector<CheckRecord> out;
    for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
    return out;
}

// ---------------------------------------------------------------------------
// output

inline std::string csv_number(double v)
{
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

/// Wall times make the report machine dependent; they are written only on request.
inline void write_csv(std::ostream& os, const std::vector<CheckRecord>& recs, bool timings)
{
    os << "suite,instance,theta,lhs_lo,lhs_hi,rhs_lo,rhs_hi,margin,status,seconds\n";
    for (const auto& r : recs) {
        os << csv_field(r.suite) << ',' << csv_field(r.instance) << ',' << csv_number(r.theta) << ','
           << csv_number(r.lhs_lo) << ',' << csv_number(r.lhs_hi) << ',' << csv_number(r.rhs_lo) << ','
           << csv_number(r.rhs_hi) << ',' << csv_number(r.margin) << ',' << to_string(r.status) << ','
           << (timings ? csv_number(r.seconds) : "") << '\n';
    }
}

struct SuiteCounts
{
    std::map<Status, size_t> by_status;
    size_t total = 0;
    /// Smallest margin among decided (PASS/FAIL) records.
    double min_margin = kInf;
    double seconds = 0.0;
};

inline std::map<std::string, SuiteCounts> count(const std::vector<CheckRecord>& recs)
{
    std::map<std::string, SuiteCounts> out;
    for (const auto& r : recs) {
        auto& c = out[r.suite];
        ++c.total;
        ++c.by_status[r.status];
        c.seconds += r.seconds;
        if (r.status == Status::Pass || r.status == Status::Fail) c.min_margin = std::min(c.min_margin, r.margin);
    }
    return out;
}

inline void write_summary(std::ostream& os, const std::vector<CheckRecord>& recs,
                          const std::vector<std::string>& suites, bool timings, size_t max_listed = 40)
{
    const auto counts = count(recs);
    const Status order[] = {Status::Pass, Status::Fail, Status::Skipped, Status::Informational, Status::Stagnated};
    char line[256];
    std::snprintf(line, sizeof line, "%-14s %8s %7s %7s %8s %7s %9s %12s", "suite", "records", "PASS", "FAIL",
                  "SKIPPED", "INFO", "STAGNATED", "min margin");
    os << line << (timings ? "    seconds" : "") << '\n';
    SuiteCounts all;
    for (const auto& s : suites) {
        const auto it = counts.find(s);
        const SuiteCounts c = it == counts.end() ? SuiteCounts{} : it->second;
        auto get = [&](Status st) {
            auto f = c.by_status.find(st);
            return f == c.by_status.end() ? size_t{0} : f->second;
        };
        std::snprintf(line, sizeof line, "%-14s %8zu %7zu %7zu %8zu %7zu %9zu %12s", s.c_str(), c.total,
                      get(order[0]), get(order[1]), get(order[2]), get(order[3]), get(order[4]),
                      std::isinf(c.min_margin) ? "-" : csv_number(c.min_margin).c_str());
        os << line;
        if (timings) {
            std::snprintf(line, sizeof line, " %10.2f", c.seconds);
            os << line;
        }
        os << '\n';
        all.total += c.total;
        for (auto st : order) all.by_status[st] += get(st);
    }
    os << "\ntotal " << all.total << " records:";
    for (auto st : order) os << ' ' << to_string(st) << '=' << all.by_status[st];
    os << '\n';
    for (auto st : {Status::Fail, Status::Stagnated, Status::Informational, Status::Skipped}) {
        size_t listed = 0, n = 0;
        for (const auto& r : recs) {
            if (r.status != st) continue;
            ++n;
            if (listed == 0) os << '\n' << to_string(st) << " records:\n";
            if (listed < max_listed) {
                os << "  " << r.suite << ' ' << r.instance;
                if (!std::isnan(r.theta)) os << " theta=" << csv_number(r.theta);
                os << " lhs=[" << csv_number(r.lhs_lo) << ", " << csv_number(r.lhs_hi) << "] rhs=["
                   << csv_number(r.rhs_lo) << ", " << csv_number(r.rhs_hi) << "]";
                if (!r.note.empty()) os << "  (" << r.note << ")";
                os << '\n';
                ++listed;
            }
        }
        if (n > listed) os << "  ... and " << n - listed << " more\n";
    }
}

/// 0 if nothing failed; 1 on FAIL, or under strict on any undecided record.
inline int exit_code(const std::vector<CheckRecord>& recs, bool strict)
{
    for (const auto& r : recs) {
        if (r.status == Status::Fail) return 1;
        if (strict && r.status != Status::Pass) return 1;
    }
    return 0;
}

} // namespace cplxinterp::harness
