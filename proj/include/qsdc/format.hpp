#pragma once

#include <string>

namespace qsdc {

/// Fixed 9-significant-digit rendering used for every CSV/JSON number.
std::string format_number(double v);

/// v rounded to 9 significant digits (so JSON dumps stay hash-stable).
double round_sig9(double v);

}  // namespace qsdc
