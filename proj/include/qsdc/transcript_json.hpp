#pragma once

#include "json.hpp"
#include "qsdc/protocol_engine.hpp"

namespace qsdc {

/// Field order is fixed; reals are rounded to 9 significant digits so dumps are byte-stable.
/// Bob's modulation offsets never appear.
nlohmann::ordered_json transcript_to_json(const BlockTranscript& t);

nlohmann::ordered_json session_to_json(const SessionReport& report);

}  // namespace qsdc
