#ifndef MATMCMC_CSV_HPP
#define MATMCMC_CSV_HPP

#include <string>
#include <vector>

namespace matmcmc {

// Writes rows with a header line; numbers are emitted with 17 significant
// digits so reruns compare byte-for-byte.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

std::string format_full(double x);

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<double>> rows;
};

// Numeric CSV reader; a non-numeric first row is taken as the header, any
// other non-numeric cell is an error naming the line.
CsvTable read_numeric_csv(const std::string& path);

}  // namespace matmcmc

#endif
