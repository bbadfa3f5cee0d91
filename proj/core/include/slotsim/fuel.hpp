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

#pragma once

namespace slotsim {

/// Power-demand fuel surrogate (g/s). Vehicle specific power
///   VSP = v * (1.1 * a + 9.81 * grade + 0.132) + 0.000302 * v^3   [kW/t]
/// drives rate = idle + c1 * VSP + c2 * VSP^2 for VSP > 0 and the idle rate
/// otherwise. Coefficients are illustrative, not a calibrated emission model.
struct FuelModel {
  double idle{0.25};
  double c1{0.08};
  double c2{0.0015};
  double grade{0.0};

  void validate() const;
  double vsp(double v, double a) const;
  double rate(double v, double a) const;
};

}  // namespace slotsim
