#include "htlcsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace htlcsim {

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::success: return "success";
        case Outcome::fail_no_route: return "fail_no_route";
        case Outcome::fail_unbalanced: return "fail_unbalanced";
        case Outcome::fail_uncooperative: return "fail_uncooperative";
        case Outcome::fail_timeout: return "fail_timeout";
        case Outcome::unknown: return "unknown";
    }
    return "?";
}

Outcome classify(const Payment& record) {
    switch (record.result) {
        case PaymentResult::success: return Outcome::success;
        case PaymentResult::unknown: return Outcome::unknown;
        case PaymentResult::fail:
            switch (record.fail_reason) {
                case FailReason::no_route: return Outcome::fail_no_route;
                case FailReason::unbalanced: return Outcome::fail_unbalanced;
                case FailReason::uncooperative: return Outcome::fail_uncooperative;
                case FailReason::timeout: return Outcome::fail_timeout;
                case FailReason::none: break;
            }
            throw std::invalid_argument("failed record without a failure reason");
        case PaymentResult::pending: break;
    }
    throw std::invalid_argument("cannot classify a pending record");
}

double student_t_975(std::uint32_t df) {
    if (df == 0) throw std::invalid_argument("student_t_975 needs df >= 1");
    return boost::math::quantile(boost::math::students_t_distribution<double>(df), 0.975);
}

namespace {

MeasureStats summarize(const std::vector<double>& batch_values, bool clamp01) {
    MeasureStats s;
    s.n_batches = static_cast<std::uint32_t>(batch_values.size());
    if (batch_values.empty()) {
        s.mean = s.variance = s.ci95_low = s.ci95_high =
            std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    double sum = 0;
    for (double v : batch_values) sum += v;
    s.mean = sum / static_cast<double>(batch_values.size());

    if (batch_values.size() >= 2) {
        double sq = 0;
        for (double v : batch_values) sq += (v - s.mean) * (v - s.mean);
        s.variance = sq / static_cast<double>(batch_values.size() - 1);
        const double half =
            student_t_975(static_cast<std::uint32_t>(batch_values.size() - 1)) *
            std::sqrt(s.variance / static_cast<double>(batch_values.size()));
        s.ci95_low = s.mean - half;
        s.ci95_high = s.mean + half;
    } else {
        s.variance = 0;
        s.ci95_low = s.ci95_high = s.mean;
    }
    if (clamp01) {
        s.ci95_low = std::clamp(s.ci95_low, 0.0, 1.0);
        s.ci95_high = std::clamp(s.ci95_high, 0.0, 1.0);
    }
    return s;
}

}  // namespace

SimStatistics batch_means(std::span<const Payment> records, std::uint32_t n_batches,
                          std::uint32_t warmup_batches) {
    if (n_batches < 2) throw std::invalid_argument("batch_means needs at least 2 batches");
    const std::size_t total_batches = static_cast<std::size_t>(n_batches) + warmup_batches;
    if (records.size() < total_batches)
        throw std::invalid_argument("fewer records (" + std::to_string(records.size()) +
                                    ") than batches (" + std::to_string(total_batches) + ")");

    const std::size_t base = records.size() / total_batches;
    const std::size_t rem = records.size() % total_batches;

    std::vector<std::vector<double>> fraction(kOutcomeCount);
    std::vector<double> time_values, attempt_values, length_values;

    std::size_t offset = 0;
    for (std::size_t b = 0; b < total_batches; ++b) {
        const std::size_t size = base + (b < rem ? 1 : 0);
        const auto batch = records.subspan(offset, size);
        offset += size;
        if (b < warmup_batches) continue;  // initial transient

        std::size_t counts[kOutcomeCount] = {};
        double time_sum = 0, attempts_sum = 0, length_sum = 0;
        std::size_t successes = 0;
        for (const Payment& r : batch) {
            ++counts[static_cast<std::size_t>(classify(r))];
            attempts_sum += static_cast<double>(r.attempts);
            if (r.result == PaymentResult::success) {
                ++successes;
                time_sum += static_cast<double>(*r.end_time - r.start_time);
                length_sum += static_cast<double>(r.route->hops.size());
            }
        }
        for (std::size_t k = 0; k < kOutcomeCount; ++k)
            fraction[k].push_back(static_cast<double>(counts[k]) / static_cast<double>(size));
        attempt_values.push_back(attempts_sum / static_cast<double>(size));
        if (successes > 0) {
            time_values.push_back(time_sum / static_cast<double>(successes));
            length_values.push_back(length_sum / static_cast<double>(successes));
        }
    }

    SimStatistics out;
    out.p_success = summarize(fraction[static_cast<std::size_t>(Outcome::success)], true);
    out.p_fail_no_route = summarize(fraction[static_cast<std::size_t>(Outcome::fail_no_route)], true);
    out.p_fail_unbalanced =
        summarize(fraction[static_cast<std::size_t>(Outcome::fail_unbalanced)], true);
    out.p_fail_uncooperative =
        summarize(fraction[static_cast<std::size_t>(Outcome::fail_uncooperative)], true);
    out.p_fail_timeout = summarize(fraction[static_cast<std::size_t>(Outcome::fail_timeout)], true);
    out.p_unknown = summarize(fraction[static_cast<std::size_t>(Outcome::unknown)], true);
    out.payment_time_ms = summarize(time_values, false);
    out.attempts = summarize(attempt_values, false);
    out.route_length = summarize(length_values, false);
    return out;
}

}  // namespace htlcsim
