// Copyright 2026 The slotsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slotsim/fuel.hpp"

#include "slotsim/errors.hpp"

namespace slotsim {

void FuelModel::validate() const {
  if (!(idle > 0.0)) throw ConfigError("fuel.idle", "must be positive");
  if (!(c1 >= 0.0)) throw ConfigError("fuel.c1", "must be non-negative");
  if (!(c2 >= 0.0)) throw ConfigError("fuel.c2", "must be non-negative");
}

double FuelModel::vsp(double v, double a) const {
  return v * (1.1 * a + 9.81 * grade + 0.132) + 0.000302 * v * v * v;
}

double FuelModel::rate(double v, double a) const {
  const double p = vsp(v, a);
  if (p <= 0.0) return idle;
  return idle + c1 * p + c2 * p * p;
}

}  // namespace slotsim
