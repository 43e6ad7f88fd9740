#include "spe/sample.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spe/io.hpp"

namespace spe {

Sample::Sample(Eigen::MatrixXd m) : data(std::move(m)) {
  if (data.rows() < 1 || data.cols() < 1)
    throw std::invalid_argument("Sample: need n >= 1 and d >= 1");
  if (!data.allFinite()) throw std::invalid_argument("Sample: entries must be finite");
}

Sample load_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample CSV: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      try {
        row.push_back(std::stod(f));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": parse error at line " + std::to_string(lineno));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ": ragged row at line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty sample file");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return Sample(std::move(m));
}

void save_sample_csv(const Sample& s, const std::string& path) {
  std::ostringstream out;
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.d(); ++j) {
      if (j) out << ',';
      out << format_double(s.data(i, j));
    }
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

}  // namespace spe
