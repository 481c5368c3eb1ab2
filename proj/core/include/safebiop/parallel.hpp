// Copyright 2026 The safebiop Authors
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


#ifndef SAFEBIOP_PARALLEL_HPP
#define SAFEBIOP_PARALLEL_HPP

#include <functional>

namespace safebiop {

/// Calls fn(0) .. fn(n-1) on up to `threads` workers. The first exception thrown is rethrown after all workers join.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace safebiop

#endif  // SAFEBIOP_PARALLEL_HPP
