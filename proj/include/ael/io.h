#pragma once

#include "ael/simlab.h"
#include "ael/types.h"

#include <iosfwd>
#include <string>

namespace ael {

// Whitespace-separated numeric matrix; '#' starts a comment. Every row
// must have the same number of columns. Parse failures name the line and
// column of the offending token.
Matrix read_matrix(std::istream& in, const std::string& name = "<input>");
Matrix read_matrix_file(const std::string& path);

// Six significant digits, '.' decimal, locale-independent.
std::string format_number(double value);

std::string coverage_csv(const CoverageReport& report);
std::string bartlett_csv(const BartlettBiasReport& report);

// Aligned human-readable variants of the same tables.
std::string coverage_table(const CoverageReport& report);
std::string bartlett_table(const BartlettBiasReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace ael
