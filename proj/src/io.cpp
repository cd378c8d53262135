#include "roughrec/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "roughrec/error.hpp"

namespace roughrec {

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

std::ifstream open_in(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Parse, "cannot open '" + file + "'");
  return in;
}

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file);
  if (!out) throw Error(ErrorKind::Parse, "cannot write '" + file + "'");
  return out;
}

bool next_row(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_path_csv(std::ostream& out, const GridRoughPath& path) {
  const int ell = path.ell();
  out << "t";
  for (int k = 1; k <= ell; ++k) out << ",X" << k;
  for (int j = 1; j <= ell; ++j)
    for (int k = j + 1; k <= ell; ++k) out << ",A" << j << k;
  out << '\n';
  for (int i = 0; i <= path.steps(); ++i) {
    out << format_double(path.times()[i]);
    for (int k = 0; k < ell; ++k) out << ',' << format_double(path.values()(i, k));
    for (int j = 0; j < ell; ++j) {
      for (int k = j + 1; k < ell; ++k) {
        out << ',' << format_double(i == 0 ? 0.0 : path.step_area(i - 1)(j, k));
      }
    }
    out << '\n';
  }
}

void write_path_csv(const std::string& file, const GridRoughPath& path) {
  auto out = open_out(file);
  write_path_csv(out, path);
}

GridRoughPath read_path_csv(std::istream& in, double alpha) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_row(in, line, line_no)) throw Error(ErrorKind::Parse, "path CSV is empty");
  const auto header = split(line);
  if (header.empty() || header[0] != "t") throw Error(ErrorKind::Parse, "path CSV must start with 't'");
  int ell = 0;
  while (ell + 1 < static_cast<int>(header.size()) && header[ell + 1] == "X" + std::to_string(ell + 1)) ++ell;
  if (ell < 1) throw Error(ErrorKind::Parse, "path CSV needs columns X1..Xl");
  const int n_area = static_cast<int>(header.size()) - 1 - ell;
  if (n_area != 0 && n_area != area_dim(ell)) {
    throw Error(ErrorKind::Parse, "path CSV has " + std::to_string(n_area) + " area columns, expected 0 or " +
                                      std::to_string(area_dim(ell)));
  }
  int col = 1 + ell;
  for (int j = 1; j <= ell && n_area > 0; ++j) {
    for (int k = j + 1; k <= ell; ++k, ++col) {
      if (header[col] != "A" + std::to_string(j) + std::to_string(k)) {
        throw Error(ErrorKind::Parse, "unexpected area column '" + header[col] + "'");
      }
    }
  }
  std::vector<double> times;
  std::vector<Vec> rows;
  std::vector<Mat> areas;
  while (next_row(in, line, line_no)) {
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": wrong column count");
    }
    times.push_back(parse_double(cells[0], line_no));
    Vec x(ell);
    for (int k = 0; k < ell; ++k) x(k) = parse_double(cells[1 + k], line_no);
    rows.push_back(std::move(x));
    Vec a = Vec::Zero(area_dim(ell));
    for (int p = 0; p < n_area; ++p) a(p) = parse_double(cells[1 + ell + p], line_no);
    if (rows.size() > 1) areas.push_back(area_from_coordinates(a, ell));
  }
  Mat values(static_cast<Eigen::Index>(rows.size()), ell);
  for (std::size_t i = 0; i < rows.size(); ++i) values.row(i) = rows[i].transpose();
  return GridRoughPath(std::move(times), std::move(values), std::move(areas), alpha);
}

GridRoughPath read_path_csv(const std::string& file, double alpha) {
  auto in = open_in(file);
  return read_path_csv(in, alpha);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t";
  for (Eigen::Index k = 1; k <= traj.states.cols(); ++k) out << ",x" << k;
  out << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << format_double(traj.times[i]);
    for (Eigen::Index k = 0; k < traj.states.cols(); ++k) out << ',' << format_double(traj.states(i, k));
    out << '\n';
  }
}

void write_trajectory_csv(const std::string& file, const Trajectory& traj) {
  auto out = open_out(file);
  write_trajectory_csv(out, traj);
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_row(in, line, line_no)) throw Error(ErrorKind::Parse, "trajectory CSV is empty");
  const auto header = split(line);
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1 || header[0] != "t") throw Error(ErrorKind::Parse, "trajectory CSV needs t,x1..xd");
  Trajectory out;
  std::vector<Vec> rows;
  while (next_row(in, line, line_no)) {
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != d + 1) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": wrong column count");
    }
    out.times.push_back(parse_double(cells[0], line_no));
    Vec x(d);
    for (int k = 0; k < d; ++k) x(k) = parse_double(cells[1 + k], line_no);
    rows.push_back(std::move(x));
  }
  out.states.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) out.states.row(i) = rows[i].transpose();
  return out;
}

void write_observations_csv(std::ostream& out, const std::vector<ObservationSet>& sets) {
  if (sets.empty() || sets.front().base_points.empty()) {
    throw Error(ErrorKind::InvalidParameter, "no observations to write");
  }
  const auto d = sets.front().base_points.front().size();
  out << "s,t,point_id";
  for (Eigen::Index k = 1; k <= d; ++k) out << ",y" << k;
  for (Eigen::Index k = 1; k <= d; ++k) out << ",z" << k;
  out << '\n';
  for (const auto& set : sets) {
    for (int r = 0; r < set.count(); ++r) {
      out << format_double(set.s) << ',' << format_double(set.t) << ',' << r;
      for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double(set.base_points[r](k));
      for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double(set.observed[r](k));
      out << '\n';
    }
  }
}

void write_observations_csv(const std::string& file, const std::vector<ObservationSet>& sets) {
  auto out = open_out(file);
  write_observations_csv(out, sets);
}

std::vector<ObservationSet> read_observations_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_row(in, line, line_no)) throw Error(ErrorKind::Parse, "observation CSV is empty");
  const auto header = split(line);
  const int rest = static_cast<int>(header.size()) - 3;
  if (rest < 2 || rest % 2 != 0 || header[0] != "s" || header[1] != "t" || header[2] != "point_id") {
    throw Error(ErrorKind::Parse, "observation CSV needs s,t,point_id,y1..yd,z1..zd");
  }
  const int d = rest / 2;
  std::vector<ObservationSet> sets;
  while (next_row(in, line, line_no)) {
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": wrong column count");
    }
    const double s = parse_double(cells[0], line_no);
    const double t = parse_double(cells[1], line_no);
    if (!(s < t)) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": interval needs s < t");
    }
    Vec y(d), z(d);
    for (int k = 0; k < d; ++k) {
      y(k) = parse_double(cells[3 + k], line_no);
      z(k) = parse_double(cells[3 + d + k], line_no);
    }
    if (sets.empty() || sets.back().s != s || sets.back().t != t) {
      sets.push_back(ObservationSet{{}, s, t, {}});
    }
    sets.back().base_points.push_back(std::move(y));
    sets.back().observed.push_back(std::move(z));
  }
  if (sets.empty()) throw Error(ErrorKind::Parse, "observation CSV has no rows");
  const auto& ref = sets.front().base_points;
  for (const auto& set : sets) {
    if (set.base_points.size() != ref.size()) {
      throw Error(ErrorKind::Parse, "base points differ across intervals");
    }
    for (std::size_t r = 0; r < ref.size(); ++r) {
      if (set.base_points[r] != ref[r]) throw Error(ErrorKind::Parse, "base points differ across intervals");
    }
  }
  return sets;
}

std::vector<ObservationSet> read_observations_csv(const std::string& file) {
  auto in = open_in(file);
  return read_observations_csv(in);
}

}  // namespace roughrec
