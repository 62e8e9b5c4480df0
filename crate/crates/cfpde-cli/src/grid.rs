//! Rectangular evaluation grids over (x, t).

/// Grid window and sampling counts; `x_start` must stay inside the
/// conformable domain `x > 0`, `t_start` inside `t >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub x_start: f64,
    pub x_end: f64,
    pub x_count: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub t_count: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            x_start: 0.1,
            x_end: 2.0,
            x_count: 50,
            t_start: 0.0,
            t_end: 1.0,
            t_count: 50,
        }
    }
}

impl GridSpec {
    /// Parses `x=a:b:n,t=c:d:n`; either axis may be omitted to keep the
    /// default window.
    pub fn parse(s: &str) -> Result<GridSpec, String> {
        let mut grid = GridSpec::default();
        for part in s.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (axis, range) = part
                .split_once('=')
                .ok_or_else(|| format!("expected `axis=start:end:count`, got `{part}`"))?;
            let pieces: Vec<&str> = range.split(':').collect();
            let [start, end, count] = pieces.as_slice() else {
                return Err(format!("expected `start:end:count`, got `{range}`"));
            };
            let start: f64 = start
                .trim()
                .parse()
                .map_err(|_| format!("bad number `{start}` in grid"))?;
            let end: f64 = end
                .trim()
                .parse()
                .map_err(|_| format!("bad number `{end}` in grid"))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("bad count `{count}` in grid"))?;
            match axis.trim() {
                "x" => {
                    grid.x_start = start;
                    grid.x_end = end;
                    grid.x_count = count;
                }
                "t" => {
                    grid.t_start = start;
                    grid.t_end = end;
                    grid.t_count = count;
                }
                other => return Err(format!("unknown grid axis `{other}` (use x or t)")),
            }
        }
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.x_start.is_finite() || self.x_start <= 0.0 {
            return Err(format!(
                "grid must satisfy x_start > 0, got {}",
                self.x_start
            ));
        }
        if self.t_start < 0.0 {
            return Err(format!(
                "grid must satisfy t_start >= 0, got {}",
                self.t_start
            ));
        }
        if self.x_end < self.x_start || self.t_end < self.t_start {
            return Err("grid ranges must be monotone (start <= end)".to_string());
        }
        if self.x_count == 0 || self.t_count == 0 {
            return Err("grid counts must be at least 1".to_string());
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_start, self.x_end, self.x_count)
    }

    pub fn ts(&self) -> Vec<f64> {
        linspace(self.t_start, self.t_end, self.t_count)
    }
}

fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let step = (end - start) / (count - 1) as f64;
    (0..count).map(|i| start + step * i as f64).collect()
}
