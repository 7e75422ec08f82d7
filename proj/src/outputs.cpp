#include "blockmpc/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace blockmpc {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.imbue(std::locale::classic());
  return os;
}

void close_out(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

std::string format_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(12) << v;
  return os.str();
}

TimingSummary summarize(const SimLog& log) {
  TimingSummary s;
  s.samples = static_cast<int>(log.samples.size());
  std::vector<double> sh, co, qp, to, kkt;
  for (const SampleRecord& r : log.samples) {
    const PhaseTimings& t = r.timings;
    s.sum.shooting_ms += t.shooting_ms;
    s.sum.condensing_ms += t.condensing_ms;
    s.sum.qp_ms += t.qp_ms;
    s.sum.total_ms += t.total_ms;
    s.max.shooting_ms = std::max(s.max.shooting_ms, t.shooting_ms);
    s.max.condensing_ms = std::max(s.max.condensing_ms, t.condensing_ms);
    s.max.qp_ms = std::max(s.max.qp_ms, t.qp_ms);
    s.max.total_ms = std::max(s.max.total_ms, t.total_ms);
    sh.push_back(t.shooting_ms);
    co.push_back(t.condensing_ms);
    qp.push_back(t.qp_ms);
    to.push_back(t.total_ms);
    kkt.push_back(r.kkt.total);
    s.qp_iters_sum += r.qp_iterations;
  }
  s.median = {median_of(sh), median_of(co), median_of(qp), median_of(to)};
  s.kkt_median = median_of(kkt);
  return s;
}

void write_outputs(const SimLog& log, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  const int nx = log.nx() > 0 ? log.nx() : 4;
  const int nu = log.nu() > 0 ? log.nu() : 1;

  {
    const auto path = dir / "traj.csv";
    auto os = open_out(path);
    os << "t";
    for (int i = 0; i < nx; ++i) os << ",x" << i;
    for (int i = 0; i < nu; ++i) os << ",u" << i;
    os << '\n';
    for (const SampleRecord& r : log.samples) {
      os << format_number(r.t);
      for (int i = 0; i < nx; ++i) os << ',' << format_number(r.x(i));
      for (int i = 0; i < nu; ++i) os << ',' << format_number(r.u(i));
      os << '\n';
    }
    close_out(os, path);
  }
  {
    const auto path = dir / "kkt.csv";
    auto os = open_out(path);
    os << "t,stationarity,eq,ineq,total\n";
    for (const SampleRecord& r : log.samples) {
      os << format_number(r.t) << ',' << format_number(r.kkt.stationarity) << ',' << format_number(r.kkt.eq_residual)
         << ',' << format_number(r.kkt.ineq_violation) << ',' << format_number(r.kkt.total) << '\n';
    }
    close_out(os, path);
  }
  {
    const auto path = dir / "timing.csv";
    auto os = open_out(path);
    os << "step,shooting_ms,condensing_ms,qp_ms,total_ms,qp_iters\n";
    for (std::size_t i = 0; i < log.samples.size(); ++i) {
      const SampleRecord& r = log.samples[i];
      os << i << ',' << format_number(r.timings.shooting_ms) << ',' << format_number(r.timings.condensing_ms) << ','
         << format_number(r.timings.qp_ms) << ',' << format_number(r.timings.total_ms) << ',' << r.qp_iterations
         << '\n';
    }
    close_out(os, path);
  }
  {
    const auto path = dir / "meta.txt";
    auto os = open_out(path);
    os << "# " << log.version << '\n';
    os << "# controller block indices: [";
    for (std::size_t i = 0; i < log.indices.size(); ++i) os << (i ? ", " : "") << log.indices[i];
    os << "]\n";
    int qp_flags = 0, x_flags = 0, u_flags = 0;
    for (const SampleRecord& r : log.samples) {
      qp_flags += r.qp_status != QpStatus::Solved;
      x_flags += r.state_violation;
      u_flags += r.input_violation;
    }
    os << "# samples: " << log.samples.size() << '\n';
    os << "# qp not solved: " << qp_flags << ", state violations: " << x_flags << ", input violations: " << u_flags
       << '\n';
    if (log.error) os << "# error: " << *log.error << '\n';
    os << log.config_echo;
    close_out(os, path);
  }
}

void print_summary(std::ostream& os, const SimLog& log, const TimingSummary& s) {
  os << "scheme " << to_string(log.scheme) << ": " << s.samples << " samples, M = "
     << (log.indices.empty() ? 0 : log.indices.size() - 1) << '\n';
  os << "            shooting_ms  condensing_ms  qp_ms  total_ms\n";
  auto line = [&](const char* name, const PhaseTimings& t) {
    os << "  " << name << "  " << format_number(t.shooting_ms) << "  " << format_number(t.condensing_ms) << "  "
       << format_number(t.qp_ms) << "  " << format_number(t.total_ms) << '\n';
  };
  line("sum   ", s.sum);
  line("median", s.median);
  line("max   ", s.max);
  os << "  qp iterations: " << s.qp_iters_sum << ", median KKT: " << format_number(s.kkt_median) << '\n';
  if (log.error) os << "  stopped early: " << *log.error << '\n';
}

void write_compare_summary(const std::vector<const SimLog*>& logs, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "scheme,M,samples,shooting_median_ms,condensing_median_ms,qp_median_ms,total_median_ms,"
        "shooting_max_ms,condensing_max_ms,qp_max_ms,total_max_ms,kkt_median\n";
  for (const SimLog* log : logs) {
    const TimingSummary s = summarize(*log);
    os << to_string(log->scheme) << ',' << (log->indices.empty() ? 0 : log->indices.size() - 1) << ',' << s.samples
       << ',' << format_number(s.median.shooting_ms) << ',' << format_number(s.median.condensing_ms) << ','
       << format_number(s.median.qp_ms) << ',' << format_number(s.median.total_ms) << ','
       << format_number(s.max.shooting_ms) << ',' << format_number(s.max.condensing_ms) << ','
       << format_number(s.max.qp_ms) << ',' << format_number(s.max.total_ms) << ',' << format_number(s.kkt_median)
       << '\n';
  }
  close_out(os, path);
}

void write_bench(const std::vector<BenchRow>& rows, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "N,M,tailored_ms,naive_ms,tailored_mults,naive_mults,predicted\n";
  for (const BenchRow& r : rows) {
    os << r.N << ',' << r.M << ',' << format_number(r.tailored_ms) << ',' << format_number(r.naive_ms) << ','
       << r.tailored_mults << ',' << r.naive_mults << ',' << r.predicted << '\n';
  }
  close_out(os, path);
}

}  // namespace blockmpc
