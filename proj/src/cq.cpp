#include "fracback/cq.hpp"

#include <cmath>
#include <string>

#include "fracback/error.hpp"

namespace fracback {

CqWeights cq_weights(double alpha, int N) {
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidArgument,
            "CQ weights need alpha in (0,1), got " + std::to_string(alpha));
    require(N >= 1, ErrorKind::InvalidArgument, "CQ weights need N >= 1");
    CqWeights out;
    out.alpha = alpha;
    out.N = N;
    out.w.resize(N + 1);
    out.partial_sums.resize(N + 1);
    out.w[0] = 1.0;
    out.partial_sums[0] = 1.0;
    for (int j = 1; j <= N; ++j) {
        out.w[j] = out.w[j - 1] * ((j - 1 - alpha) / j);
        out.partial_sums[j] = out.partial_sums[j - 1] + out.w[j];
    }
    return out;
}

Vector caputo_apply(const CqWeights& w, const std::vector<GridFunction>& history, double tau) {
    require(!history.empty(), ErrorKind::InvalidArgument, "empty history");
    const int n = static_cast<int>(history.size()) - 1;
    require(n <= w.N, ErrorKind::InvalidArgument,
            "history has " + std::to_string(n + 1) + " states but only " + std::to_string(w.N + 1) + " weights");
    require(tau > 0.0, ErrorKind::InvalidArgument, "tau must be positive");
    const auto size = history[0].size();
    Vector acc = Vector::Zero(size);
    for (int j = 1; j <= n; ++j) {
        require(history[j].size() == size, ErrorKind::InvalidArgument, "history states differ in size");
        acc += w.w[n - j] * (history[j] - history[0]);
    }
    return std::pow(tau, -w.alpha) * acc;
}

}  // namespace fracback
