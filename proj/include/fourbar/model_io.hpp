#pragma once

#include <string>

#include "fourbar/blended.hpp"

namespace fourbar {

// Bit-exact textual encoding of doubles (C99 %a form).
std::string hexfloat(double x);
double parse_hexfloat(const std::string& s);

// Structured-text model file; save -> load -> save is byte-identical.
void save_model(const BlendedModel& model, const std::string& path);
BlendedModel load_model(const std::string& path);

}  // namespace fourbar
