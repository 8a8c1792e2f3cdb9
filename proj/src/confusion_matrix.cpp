#include "cmu/confusion_matrix.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "cmu/error.hpp"

namespace cmu {

ConfusionMatrix ConfusionMatrix::validate(Count tp, Count fn, Count fp, Count tn) {
    if (tp < 0 || fn < 0 || fp < 0 || tn < 0) {
        std::ostringstream msg;
        msg << "confusion matrix counts must be non-negative (tp=" << tp << ", fn=" << fn
            << ", fp=" << fp << ", tn=" << tn << ")";
        throw Error(ErrorCode::NegativeCount, msg.str());
    }
    if (tp + fn + fp + tn == 0) {
        throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty (n = 0)");
    }
    return ConfusionMatrix(tp, fn, fp, tn);
}

double BetaParams::variance() const noexcept {
    const double s = alpha + beta;
    return alpha * beta / (s * s * (s + 1.0));
}

RatePrior RatePrior::custom(double alpha, double beta) {
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw Error(ErrorCode::InvalidArgument, "custom prior requires finite alpha >= 0 and beta >= 0");
    }
    return {PriorKind::Custom, {alpha, beta}};
}

namespace {

double parse_double(std::string_view text, std::string_view what) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw Error(ErrorCode::ParseError, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
    }
    return value;
}

std::string lower(std::string_view text) {
    std::string out(text);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

RatePrior RatePrior::parse(std::string_view text) {
    const std::string name = lower(text);
    if (name == "laplace") return laplace();
    if (name == "jeffreys") return jeffreys();
    if (name == "haldane") return haldane();
    constexpr std::string_view prefix = "custom:";
    if (name.starts_with(prefix)) {
        const std::string_view body = std::string_view(name).substr(prefix.size());
        const auto comma = body.find(',');
        if (comma == std::string_view::npos) {
            throw Error(ErrorCode::ParseError, "custom prior must be written custom:a,b");
        }
        return custom(parse_double(body.substr(0, comma), "prior alpha"),
                      parse_double(body.substr(comma + 1), "prior beta"));
    }
    throw Error(ErrorCode::ParseError,
                "unknown prior '" + std::string(text) + "' (expected laplace, jeffreys, haldane or custom:a,b)");
}

std::string RatePrior::to_string() const {
    if (kind != PriorKind::Custom) return std::string(cmu::to_string(kind));
    std::ostringstream out;
    out << "custom:" << params.alpha << "," << params.beta;
    return out.str();
}

PrevalencePolicy PrevalencePolicy::fixed(double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "fixed prevalence must lie in [0, 1]");
    }
    PrevalencePolicy policy;
    policy.mode_ = PrevalenceMode::Fixed;
    policy.fixed_ = value;
    return policy;
}

PrevalencePolicy PrevalencePolicy::external(BetaParams params) {
    if (!params.proper() || !std::isfinite(params.alpha) || !std::isfinite(params.beta)) {
        throw Error(ErrorCode::ImproperPosterior, "external prevalence requires alpha > 0 and beta > 0");
    }
    PrevalencePolicy policy;
    policy.mode_ = PrevalenceMode::External;
    policy.external_ = params;
    return policy;
}

std::string_view to_string(PriorKind kind) noexcept {
    switch (kind) {
        case PriorKind::Laplace: return "laplace";
        case PriorKind::Jeffreys: return "jeffreys";
        case PriorKind::Haldane: return "haldane";
        case PriorKind::Custom: return "custom";
    }
    return "unknown";
}

std::string_view to_string(PrevalenceMode mode) noexcept {
    switch (mode) {
        case PrevalenceMode::Inferred: return "inferred";
        case PrevalenceMode::Fixed: return "fixed";
        case PrevalenceMode::External: return "external";
    }
    return "unknown";
}

}  // namespace cmu
