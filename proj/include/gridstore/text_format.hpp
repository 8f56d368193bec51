#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridstore/arrangement.hpp"
#include "gridstore/world.hpp"

// Line-oriented text formats shared by the CLI and golden tests.
//
//   arrangement:  grid <rows> <cols> <loads>
//                 place <load> <row>:<col>          (one line per load)
//   action log:   <store|retrieve|relocate> <load> <row>:<col> ...
//   sequence:     labels separated by commas and/or whitespace
//
// '#' starts a comment; blank lines are ignored. Parsers throw
// std::invalid_argument with the offending line number.

namespace gridstore {

std::string format_cell(Cell cell);
std::string format_action(const Action& action);
std::string format_actions(std::span<const Action> log);
std::vector<Action> parse_actions(std::string_view text);

std::string format_arrangement(const Arrangement& arr);
Arrangement parse_arrangement(std::string_view text);

std::string format_sequence(std::span<const Load> seq);
Sequence parse_sequence(std::string_view text);

/// Multi-line picture of the storage rows, top row first. Empty cells are '.'.
std::string render(const Arrangement& arr);

}  // namespace gridstore
