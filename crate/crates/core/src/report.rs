//! CSV emission. Header row, comma separator, `.` decimals; floats use
//! Rust's shortest round-trip formatting so output is byte-stable.

use std::io::{self, Write};

use crate::analysis::{BoundReportRow, HistogramData};
use crate::bench::BenchRow;
use crate::train::TrainLog;

pub fn write_bound_report<W: Write>(mut w: W, rows: &[BoundReportRow]) -> io::Result<()> {
    writeln!(w, "k,exact,loose,tight")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.k, r.exact_ratio, r.loose_bound, r.tight_bound)?;
    }
    Ok(())
}

pub fn write_histogram<W: Write>(mut w: W, h: &HistogramData) -> io::Result<()> {
    writeln!(w, "bin_lo,bin_hi,count,cdf")?;
    for (i, (&count, &cdf)) in h.counts.iter().zip(&h.cdf).enumerate() {
        writeln!(w, "{},{},{},{}", h.bin_edges[i], h.bin_edges[i + 1], count, cdf)?;
    }
    Ok(())
}

pub fn write_pi_shape<W: Write>(mut w: W, rows: &[(usize, f64, f64)]) -> io::Result<()> {
    writeln!(w, "i,pi_sq,line")?;
    for (i, s, line) in rows {
        writeln!(w, "{i},{s},{line}")?;
    }
    Ok(())
}

pub fn write_train_log<W: Write>(mut w: W, log: &TrainLog) -> io::Result<()> {
    write!(w, "iter,loss,agg_l2sq,comm_count_cum")?;
    for p in 0..log.workers {
        write!(w, ",sel_count_w{p}")?;
    }
    writeln!(w)?;
    for r in &log.iters {
        write!(w, "{},{},{},{}", r.iter, r.loss, r.agg_l2sq, r.comm_count_cum)?;
        for c in &r.sel_counts {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_epoch_log<W: Write>(mut w: W, log: &TrainLog) -> io::Result<()> {
    writeln!(w, "epoch,eval_loss,eval_acc")?;
    for e in &log.epochs {
        writeln!(w, "{},{},{}", e.epoch, e.eval_loss, e.eval_acc)?;
    }
    Ok(())
}

pub fn write_bench<W: Write>(mut w: W, rows: &[BenchRow]) -> io::Result<()> {
    writeln!(w, "d,k,kind,wall_ms_median,full_passes,selected_count,recall")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.d, r.k, r.kind, r.wall_ms, r.full_passes, r.selected_count, r.recall
        )?;
    }
    Ok(())
}
