#ifndef CONTACTROLL_REPORT_HPP
#define CONTACTROLL_REPORT_HPP

// Named residual records. Every check in the library reports through this:
// a stable check id, the evaluation point, the raw residual magnitude, the
// scale of the terms that formed it, and the scale-aware relative residual
// rel = |residual| / (1 + scale). The expressions being checked suffer heavy
// cancellation, so raw magnitudes alone would be meaningless.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace contactroll {

struct ResidualRecord {
    std::string check_id;
    double u = 0, v = 0, w = 0;
    double residual = 0;
    double scale = 0;
    double rel = 0;
    double tol = 0;
    bool pass = false;
};

struct ResidualReport {
    std::vector<ResidualRecord> records;

    ResidualRecord& add(std::string check_id, double u, double v, double w,
                        double residual, double scale, double tol) {
        ResidualRecord r;
        r.check_id = std::move(check_id);
        r.u = u; r.v = v; r.w = w;
        r.residual = residual;
        r.scale = scale;
        r.rel = residual / (1.0 + scale);
        r.tol = tol;
        r.pass = r.rel < tol;
        records.push_back(std::move(r));
        return records.back();
    }

    void merge(const ResidualReport& o) {
        records.insert(records.end(), o.records.begin(), o.records.end());
    }

    bool all_pass() const {
        return std::all_of(records.begin(), records.end(),
                           [](const ResidualRecord& r) { return r.pass; });
    }

    double max_rel(const std::string& id_prefix = "") const {
        double m = 0;
        for (const auto& r : records)
            if (id_prefix.empty() || r.check_id.rfind(id_prefix, 0) == 0)
                m = std::max(m, r.rel);
        return m;
    }

    size_t count_failed() const {
        size_t n = 0;
        for (const auto& r : records) n += r.pass ? 0 : 1;
        return n;
    }
};

}  // namespace contactroll

#endif  // CONTACTROLL_REPORT_HPP
