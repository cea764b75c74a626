// Copyright 2026 The aggmia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AGGMIA_REFERENCE_POOL_H_
#define AGGMIA_REFERENCE_POOL_H_

#include <vector>

#include "aggmia/mobility.h"

namespace aggmia {

// Traces an adversary draws training groups from: real traces for the
// Knock-Knock baseline, synthetic ones for the zero-knowledge attack.
struct ReferencePool {
  enum class Kind { kRealKnockKnock, kSyntheticZeroKnowledge };
  Kind kind = Kind::kSyntheticZeroKnowledge;
  std::vector<LocationTrace> traces;
  // Real user ids for kRealKnockKnock (parallel to traces); empty otherwise.
  std::vector<UserId> ids;

  std::size_t size() const { return traces.size(); }
};

}  // namespace aggmia

#endif  // AGGMIA_REFERENCE_POOL_H_
