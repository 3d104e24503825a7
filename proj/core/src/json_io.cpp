#include "gvar/json_io.hpp"

#include "gvar/errors.hpp"

namespace gvar {

nlohmann::json to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json to_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

nlohmann::json to_json(const EstimateReport& report) {
    return {{"k", report.k},
            {"n", report.n},
            {"psiHat", report.psi_hat},
            {"scaleFactor", report.scale_factor},
            {"cov", to_json(report.empirical_cov.entries())}};
}

nlohmann::json to_json(const CertificateReport& report) {
    nlohmann::json j{{"k", report.k},
                     {"gap", report.gap},
                     {"worstPoint", report.worst_point},
                     {"supportEqualityResidual", report.support_equality_residual}};
    if (report.dual) {
        j["dual"] = {{"M", to_json(report.dual->ellipsoid_matrix)},
                     {"center", to_json(report.dual->center)},
                     {"traceResidual", report.dual->trace_residual},
                     {"containmentSlack", report.dual->containment_slack}};
    }
    return j;
}

nlohmann::json to_json(const DiscreteMeasure& mu, int k, double psi_value,
                       const CertificateReport& certificate) {
    return {{"support", to_json(mu.support())},
            {"weights", to_json(mu.weights())},
            {"psi", {{std::to_string(k), psi_value}}},
            {"certificate", to_json(certificate)}};
}

nlohmann::json to_json(const DesignReport& report, const DesignMeasure& measure) {
    nlohmann::json support = nlohmann::json::array();
    for (const auto idx : report.support) support.push_back(idx);
    nlohmann::json polished = nlohmann::json::array();
    for (const auto& p : report.polished)
        polished.push_back({{"t", p.location}, {"weight", p.weight}});
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json labels = nlohmann::json::array();
    for (Eigen::Index i = 0; i < measure.weights.size(); ++i) {
        if (measure.weights(i) <= 0.0) continue;
        weights.push_back(measure.weights(i));
        labels.push_back(measure.space->labels[static_cast<std::size_t>(i)]);
    }
    return {{"k", report.k},
            {"criterion", report.criterion},
            {"gap", report.gap},
            {"feasible", report.feasible},
            {"support", std::move(support)},
            {"polished", std::move(polished)},
            {"points", std::move(labels)},
            {"weights", std::move(weights)}};
}

nlohmann::json to_json(const MonteCarloReport& report) {
    return {{"k", report.k},
            {"n", report.n},
            {"replicates", report.replicates},
            {"theoreticalPsi", report.theoretical},
            {"asymptoticVariance", report.asymptotic_variance},
            {"ksDistance", report.ks_distance},
            {"summary",
             {{"min", report.summary.min},
              {"q25", report.summary.q25},
              {"median", report.summary.median},
              {"q75", report.summary.q75},
              {"max", report.summary.max},
              {"mean", report.summary.mean},
              {"variance", report.summary.variance}}},
            {"ratios", report.ratios}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw IoError("expected a nonempty JSON array of rows");
    const std::size_t cols = j.front().size();
    Eigen::MatrixXd m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != cols) throw IoError("ragged JSON matrix");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return m;
}

} // namespace gvar
