#include "sidle/trace.hpp"

namespace sidle {

namespace {

void append_endpoint(std::string& out, std::int64_t v) {
  switch (v) {
    case kTraceNone: out += '-'; break;
    case kTraceBase: out += "base"; break;
    case kTraceBroadcast: out += '*'; break;
    default: out += std::to_string(v); break;
  }
}

}  // namespace

std::int64_t trace_id(NodeId id) {
  return id.valid() ? static_cast<std::int64_t>(id.value) : kTraceBroadcast;
}

std::string Trace::to_csv() const {
  std::string out = "time_ms,kind,src,dst,bytes,outcome\n";
  out.reserve(out.size() + records_.size() * 40);
  for (const TraceRecord& r : records_) {
    out += std::to_string(r.time);
    out += ',';
    out += r.kind;
    out += ',';
    append_endpoint(out, r.src);
    out += ',';
    append_endpoint(out, r.dst);
    out += ',';
    out += std::to_string(r.bytes);
    out += ',';
    out += r.outcome;
    out += '\n';
  }
  return out;
}

}  // namespace sidle
