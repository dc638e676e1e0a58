#include "rsflow/error.hpp"

namespace rsflow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::DegenerateMetric: return "degenerate-metric";
    case ErrorKind::PoleUndefined: return "pole-undefined";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Config: return "config";
    case ErrorKind::StepRejected: return "step-rejected";
    case ErrorKind::NewtonDivergence: return "newton-divergence";
    case ErrorKind::DtCollapse: return "dt-collapse";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace rsflow
