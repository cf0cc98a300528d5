//! A metered execution context: registers, a resource log and a cost model.

use num_bigint::{BigInt, BigUint};

use crate::bitbuf::{BitBuffer, BufferId, RegisterFile, Window};
use crate::error::{Error, Result};
use crate::revarith::CostModel;
use crate::tracer::ResourceLog;

/// Everything a reversible computation touches. One context is used by one
/// thread at a time; independent contexts share nothing.
#[derive(Debug, Clone, Default)]
pub struct Context {
    regs: RegisterFile,
    log: ResourceLog,
    cost: CostModel,
}

impl Context {
    pub fn new(cost: CostModel) -> Self {
        Self {
            regs: RegisterFile::new(),
            log: ResourceLog::new(),
            cost,
        }
    }

    pub fn regs(&self) -> &RegisterFile {
        &self.regs
    }

    pub fn log(&self) -> &ResourceLog {
        &self.log
    }

    pub fn log_mut(&mut self) -> &mut ResourceLog {
        &mut self.log
    }

    pub fn cost(&self) -> &CostModel {
        &self.cost
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut RegisterFile, &mut ResourceLog, &CostModel) {
        (&mut self.regs, &mut self.log, &self.cost)
    }

    /// Allocates a zeroed register and charges it to the log.
    pub fn alloc_buffer(&mut self, bits: usize) -> BufferId {
        self.log.track_alloc(bits as u64);
        self.regs.new_buffer(bits)
    }

    /// Allocates a zeroed register and returns a window over all of it.
    pub fn alloc(&mut self, bits: usize) -> Result<Window> {
        if bits == 0 {
            return Err(Error::InvalidInput(
                "cannot allocate a 0-bit register".into(),
            ));
        }
        let id = self.alloc_buffer(bits);
        self.regs.full_window(id)
    }

    /// Releases a register that must already be all zero.
    pub fn release(&mut self, id: BufferId) -> Result<()> {
        let buf = self.regs.buffer(id)?;
        if !buf.is_zero() {
            return Err(Error::Invariant(format!(
                "register {id:?} released with {} nonzero bits",
                buf.count_ones()
            )));
        }
        let bits = buf.len() as u64;
        self.log.track_free(bits)?;
        self.regs.remove(id)?;
        Ok(())
    }

    pub fn window(&self, id: BufferId, offset: usize, width: usize) -> Result<Window> {
        self.regs.window(id, offset, width)
    }

    pub fn buffer(&self, id: BufferId) -> Result<&BitBuffer> {
        self.regs.buffer(id)
    }

    pub fn read(&self, w: Window) -> Result<BigUint> {
        self.regs.read_uint(w)
    }

    pub fn read_u128(&self, w: Window) -> Result<u128> {
        self.regs.read_u128(w)
    }

    /// Sets a register's initial value.
    pub fn load(&mut self, w: Window, value: &BigUint) -> Result<()> {
        self.regs.write_uint(w, value)
    }

    pub fn offset(&mut self, w: Window, delta: &BigInt) -> Result<()> {
        self.regs.offset_uint(w, delta)
    }
}
