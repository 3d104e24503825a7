#pragma once

#include <nlohmann/json.hpp>

#include "gvar/design.hpp"
#include "gvar/estimate.hpp"
#include "gvar/maxdiv.hpp"
#include "gvar/measure.hpp"
#include "gvar/simulate.hpp"

namespace gvar {

[[nodiscard]] nlohmann::json to_json(const Eigen::MatrixXd& m);
[[nodiscard]] nlohmann::json to_json(const Eigen::VectorXd& v);
[[nodiscard]] nlohmann::json to_json(const EstimateReport& report);
[[nodiscard]] nlohmann::json to_json(const CertificateReport& report);
[[nodiscard]] nlohmann::json to_json(const DiscreteMeasure& mu, int k, double psi_value,
                                     const CertificateReport& certificate);
[[nodiscard]] nlohmann::json to_json(const DesignReport& report, const DesignMeasure& measure);
[[nodiscard]] nlohmann::json to_json(const MonteCarloReport& report);

[[nodiscard]] Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

} // namespace gvar
