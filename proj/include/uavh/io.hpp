// Copyright 2026 The uavh Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     https://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serialization: JSON documents for every persisted type (schema in
// docs/config_schema.json) and RFC-4180 CSV output. Doubles are written in
// shortest round-trip form, so JSON and CSV files reload bit-exactly.

#ifndef UAVH_IO_HPP_
#define UAVH_IO_HPP_

#include <json.hpp>
#include <string>
#include <vector>

#include "uavh/channel.hpp"
#include "uavh/citygen.hpp"
#include "uavh/offline.hpp"
#include "uavh/smooth.hpp"

namespace uavh {

using Json = nlohmann::json;

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

// One CSV record; fields containing separators, quotes or line breaks are
// quoted and embedded quotes doubled.
std::string csv_row(const std::vector<std::string>& fields);
// Records of an RFC-4180 document (CRLF or LF line ends, quoted fields may
// span lines); blank lines are skipped. Throws std::invalid_argument on an
// unterminated quote.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

// Throws std::invalid_argument naming the first key of the object `j` that
// is not in `known`; `what` names the document in the message.
void require_known_keys(const Json& j, const std::vector<std::string>& known,
                        const std::string& what);

Json to_json(const CityParams& p);
CityParams city_params_from_json(const Json& j);
Json to_json(const CityRealization& city);
CityRealization city_from_json(const Json& j);
Json to_json(const LosSampleTable& t);

Json to_json(const ChannelParams& p);
// Missing fields keep their urban-preset defaults; `sensors` sizes P_k when
// the document does not list per-sensor powers.
ChannelParams channel_params_from_json(const Json& j, std::size_t sensors);
Json to_json(const LogisticFit& fit);

Json to_json(const MissionConfig& cfg);
MissionConfig mission_from_json(const Json& j);
Json to_json(const OfflineSolution& sol);
OfflineSolution offline_solution_from_json(const Json& j);

Json to_json(const SolveReport& r);
// Debug dump of a smooth program: structure plus values and gradients of
// every constraint at the start point.
Json to_json(const SmoothConvexProgram& prog);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace uavh

#endif  // UAVH_IO_HPP_
