import curses
import threading
from datetime import datetime
from time import sleep
from typing import Any, Dict, List, Optional, Tuple

from .grid import ReportRow


def generate_progress_bar(bar_len: int, current: int, max_: int) -> str:
    """Generates a string containing a progress bar. The string contains
    the progress bar followed by the progress count, e.g

         | ...........                    | 34/97

    :param bar_len: length of the bar
    :param current: current progress step
    :param max_: max progress step (current == max_ means the bar is at 100%)
    """
    fill_char = "█"
    res = "|"
    fill_ratio = current / max_ if max_ else 1.0
    filled_bar = fill_char * int((bar_len - 2) * fill_ratio)
    res += filled_bar
    res += " " * (bar_len - 1 - len(res))
    res += "|"
    res += f" {current:3}/{max_}"
    return res


class GridDisplay:
    """Graphical terminal display for the state of a grid run.
    Based on python curses libray

    Attributes:
        active: whether it should be displayed to the terminal
    """

    def __init__(self) -> None:
        self.active = False
        self.scr: Any = None
        # INFO
        self.main_title = "dotmat grid"
        self.sample_size: Optional[int] = None
        self.algorithm = "-"
        self.learning_rate: Optional[float] = None
        self.cells_progress: Tuple[int, int] = (0, 1)
        self.current_task = "Starting up..."
        self.res_win_title = "Results"
        self.best_mae: Dict[str, float] = {}
        self.last_rows: List[ReportRow] = []
        self.max_rows = 50
        # WINDOW SIZES
        self.global_win_x_ratio = 0.35
        self.global_win_y_lines = 3
        # OTHER
        self._start_time: Optional[datetime] = None

    def start_cell(self, sample_size: int, algorithm: str, lr: float) -> None:
        """Show the cell about to be trained"""
        self.sample_size = sample_size
        self.algorithm = algorithm
        self.learning_rate = lr
        self.current_task = f"Training {algorithm} (lr={lr}, n={sample_size})..."

    def record_row(self, row: ReportRow, done: int, total: int) -> None:
        """Record a finished cell"""
        self.cells_progress = (done, total)
        best = self.best_mae.get(row.algorithm)
        if best is None or row.mae < best:
            self.best_mae[row.algorithm] = row.mae
        self.last_rows.append(row)
        self.last_rows = self.last_rows[-self.max_rows :]

    def notify_finished(self) -> None:
        """Tell the display that the grid run finished"""
        self.current_task = "Done. Ctrl+C to close window"

    def elapsed_seconds(self) -> int:
        if self._start_time:
            return int((datetime.now() - self._start_time).total_seconds())
        return 0

    def start(self, scr: Any) -> None:
        """Make the display active

        :param scr: curses screen to display to
        """
        self.active = True
        self.scr = scr
        self._start_time = datetime.now()

    @staticmethod
    def add_info(
        w: Any,
        y: int,
        x: int,
        what: str,
        info: Any,
        info_col: Optional[int] = None,
    ) -> None:
        """Convenience method to write an info string in a window that
        handles coloring and out-of-bounds coordinates"""
        if y >= w.getmaxyx()[0] or x >= w.getmaxyx()[1]:
            return
        if w.getmaxyx()[0] <= 2 or w.getmaxyx()[1] <= 2:
            return

        what += ":"
        w.addstr(y, x, what, BLUE or 0)

        if (
            w.getyx()[0] + 1 >= w.getmaxyx()[0]
            or w.getyx()[1] + 1 >= w.getmaxyx()[1]
        ):
            return

        if info_col is None:
            w.addstr(f" {info}")
        else:
            w.addstr(f" {info}", info_col)

    @staticmethod
    def format_row(row: ReportRow) -> str:
        return (
            f"n={row.sample_size:<5} {row.algorithm:<18} lr={row.learning_rate:<8g} "
            f"MAE={row.mae:.4f}  Matthew={row.matthew_degree:.4f}"
        )

    def update(self) -> None:
        """Refresh the display"""
        if not self.active:
            return
        curses.update_lines_cols()
        assert self.scr
        self.scr.erase()
        self.scr.border(0)
        x_pos = (curses.COLS - len(self.main_title)) // 2
        if x_pos > 0:
            self.scr.addstr(0, x_pos, self.main_title, curses.A_BOLD | (GREEN or 0))
        # Global info window
        glob_lines = self.global_win_y_lines * 2 - 1
        glob_cols = int(curses.COLS * self.global_win_x_ratio)
        if glob_cols > 8 and glob_lines < self.scr.getmaxyx()[0]:
            global_win = self.scr.derwin(glob_lines, glob_cols, 0, 1)
            self.add_info(global_win, 1, 1, "Sample size", self.sample_size or "-")
            self.add_info(global_win, 2, 1, "Algorithm", self.algorithm)
            self.add_info(
                global_win,
                3,
                1,
                "Learning rate",
                "-" if self.learning_rate is None else self.learning_rate,
            )
            self.add_info(global_win, 4, 1, "Elapsed", f"{self.elapsed_seconds()}s")
        # Current task window
        curr_cols = curses.COLS - 1 - glob_cols
        if curr_cols > 7:
            current_win = self.scr.derwin(glob_lines, curr_cols, 0, glob_cols)
            x_pos = (current_win.getmaxyx()[1] - len(self.current_task)) // 2
            if x_pos > 0:
                current_win.addstr(1, x_pos, self.current_task)
            bar_len = int(current_win.getmaxyx()[1] * 0.66)
            line2 = generate_progress_bar(bar_len, *self.cells_progress)
            x_pos = (current_win.getmaxyx()[1] - len(line2)) // 2
            if x_pos > 0:
                current_win.addstr(2, x_pos, line2)
            best = ", ".join(f"{a} {m:.4f}" for a, m in sorted(self.best_mae.items()))
            if best:
                best_line = f"Best MAE: {best}"[: current_win.getmaxyx()[1] - 2]
                current_win.addstr(3, 1, best_line, YELLOW or 0)
        # Results window
        res_win_y_start = glob_lines
        res_height = curses.LINES - 1 - res_win_y_start
        if res_height < 3 or curses.COLS < 6:
            self.scr.refresh()
            return
        res_win = self.scr.derwin(res_height, curses.COLS - 2, res_win_y_start, 1)
        res_lines, res_cols = res_win.getmaxyx()
        res_win.border(" ", " ", 0, " ", " ", " ", " ", " ")
        x_pos = (res_cols - len(self.res_win_title)) // 2
        if x_pos > 0:
            res_win.addstr(0, x_pos, self.res_win_title, curses.A_BOLD | (GREEN or 0))
        shown = self.last_rows[-(res_lines - 2) :] if self.last_rows else []
        for y, row in enumerate(shown, start=1):
            res_win.addstr(y, 1, self.format_row(row)[: res_cols - 2])
        if not shown:
            res_win.addstr(res_lines // 2, (res_cols - 1) // 2, "-")
        self.scr.refresh()

    def stop(self) -> None:
        """Stop displaying"""
        self.active = False
        self.scr = None


# Global display variables
display = GridDisplay()
display_thread: Optional[threading.Thread] = None

# curses color pairs
GREEN: Optional[int] = None
BLUE: Optional[int] = None
YELLOW: Optional[int] = None


def _display() -> None:
    """Task to be run in the display thread. Initialises curses, starts
    the display, and properly resets terminal settings before the thread
    terminates"""
    global GREEN
    global BLUE
    global YELLOW
    try:
        stdscr = curses.initscr()
        curses.noecho()
        curses.curs_set(False)
        curses.start_color()
        curses.use_default_colors()
        curses.init_pair(1, curses.COLOR_GREEN, -1)
        curses.init_pair(2, curses.COLOR_BLUE, -1)
        curses.init_pair(3, curses.COLOR_YELLOW, -1)
        GREEN = curses.color_pair(1)
        BLUE = curses.color_pair(2)
        YELLOW = curses.color_pair(3)
        display.start(stdscr)
        while display.active:
            try:
                display.update()
            except curses.error:
                # Terminal too small for the layout, retry at next refresh
                pass
            sleep(0.1)
    finally:
        display.stop()
        curses.echo()
        curses.curs_set(True)
        curses.endwin()


def start_display() -> None:
    """Start the terminal display thread"""
    global display_thread
    if display_thread is None:
        display_thread = threading.Thread(target=_display, args=())
        display_thread.daemon = True
        display_thread.start()


def stop_display() -> None:
    """Stop the terminal display thread (blocking until the thread exits)"""
    global display_thread
    if display_thread is not None:
        display.stop()
        display_thread.join()  # Wait until it terminates
        display_thread = None
