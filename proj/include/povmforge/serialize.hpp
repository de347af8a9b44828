#pragma once

#include <string>

#include "povmforge/compiler.hpp"
#include "povmforge/simulator.hpp"

namespace povmforge {

// JSON wire formats. Rank-1 POVMs carry weighted kets; general POVMs carry
// full matrices. All complex numbers are [re, im] pairs.
std::string povm_to_json(const Povm& p);
Povm povm_from_json(const std::string& text);

std::string state_set_to_json(const StateSet& s);
StateSet state_set_from_json(const std::string& text);

std::string program_to_json(const CircuitProgram& prog);
CircuitProgram program_from_json(const std::string& text);

std::string count_table_to_json(const CountTable& t);
CountTable count_table_from_json(const std::string& text);

std::string phase_error_to_json(const PhaseError& e);
PhaseError phase_error_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace povmforge
