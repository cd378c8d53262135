#pragma once

// CSV file formats.
//
//   path:         t,X1,...,Xl[,A12,A13,...,A{l-1}{l}]  (A on row i = area of [t_{i-1}, t_i])
//   trajectory:   t,x1,...,xd
//   observations: s,t,point_id,y1..yd,z1..zd
//
// Doubles are written in shortest round-trip form, so write -> read is exact.

#include <iosfwd>
#include <string>
#include <vector>

#include "roughrec/rde.hpp"
#include "roughrec/roughpath.hpp"

namespace roughrec {

std::string format_double(double v);

void write_path_csv(std::ostream& out, const GridRoughPath& path);
void write_path_csv(const std::string& file, const GridRoughPath& path);
GridRoughPath read_path_csv(std::istream& in, double alpha = 0.5);
GridRoughPath read_path_csv(const std::string& file, double alpha = 0.5);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& file, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);

void write_observations_csv(std::ostream& out, const std::vector<ObservationSet>& sets);
void write_observations_csv(const std::string& file, const std::vector<ObservationSet>& sets);
/// Groups rows by consecutive (s, t); base points must agree across intervals.
std::vector<ObservationSet> read_observations_csv(std::istream& in);
std::vector<ObservationSet> read_observations_csv(const std::string& file);

}  // namespace roughrec
