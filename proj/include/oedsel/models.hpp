#pragma once

#include <variant>

#include "oedsel/models/epidemic.hpp"
#include "oedsel/models/linear_gaussian.hpp"
#include "oedsel/models/model.hpp"
#include "oedsel/models/spatial_poisson.hpp"

namespace oedsel {

static_assert(ObservationModel<LinearGaussianModel>);
static_assert(ObservationModel<EpidemicModel>);
static_assert(ObservationModel<SpatialPoissonModel>);

enum class ModelKind { linear_gaussian, epidemic, spatial_poisson };

using ModelParams = std::variant<LinearGaussianParams, EpidemicParams, SpatialPoissonParams>;
using AnyModel = std::variant<LinearGaussianModel, EpidemicModel, SpatialPoissonModel>;

inline AnyModel make_model(const ModelParams& params) {
  return std::visit(
      [](const auto& p) -> AnyModel {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearGaussianParams>) return LinearGaussianModel(p);
        else if constexpr (std::is_same_v<P, EpidemicParams>) return EpidemicModel(p);
        else return SpatialPoissonModel(p);
      },
      params);
}

}  // namespace oedsel
